#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "difflow/geometry.hpp"
#include "difflow/lattice.hpp"

namespace difflow {

template <typename T>
struct Grid2 {
    int n1 = 0;
    int n2 = 0;
    std::vector<T> cells;

    Grid2() = default;
    Grid2(int rows, int cols) : n1(rows), n2(cols), cells(static_cast<std::size_t>(rows) * cols) {}

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }
    T& at(int i, int j) { return cells[index(i, j)]; }
    const T& at(int i, int j) const { return cells[index(i, j)]; }
};

using ScalarGrid = Grid2<double>;
using VecGrid = Grid2<Vec2>;
using GradientField = Grid2<Mat2>;
using HessianField = Grid2<Hess2>;

// Discrete map u(x) = B x + v(x) with v periodic, sampled on the uniform grid
// x_ij = basis_domain (i/n1, j/n2). v holds the raw (lifted) displacement in
// target units; it is never wrapped into the target fundamental domain, since
// differences across a wrapping cut would be meaningless.
struct MapField {
    TorusPair pair;
    int n1 = 0;
    int n2 = 0;
    double time = 0.0;
    std::vector<Vec2> v;

    MapField(TorusPair torus_pair, int rows, int cols);

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }
    Vec2& at(int i, int j) { return v[index(i, j)]; }
    const Vec2& at(int i, int j) const { return v[index(i, j)]; }

    // Grid point in Cartesian coordinates on the domain torus.
    Vec2 grid_point(int i, int j) const {
        return pair.domain.from_lattice({static_cast<double>(i) / n1, static_cast<double>(j) / n2});
    }
    Vec2 map_value(int i, int j) const { return pair.linear_part * grid_point(i, j) + at(i, j); }
};

// Stencil weights for Cartesian derivatives on a grid that is uniform in
// lattice coordinates. With A = basis^-1 and M = A A^T, the Laplacian is
// M11 f_11 + 2 M12 f_12 + M22 f_22 in lattice coordinates, which gives the
// usual 5-point stencil plus a 4-corner cross term when M12 != 0.
struct StencilGeometry {
    Mat2 inv_basis;
    double c1 = 0.0;      // M11 n1^2
    double c2 = 0.0;      // M22 n2^2
    double ccross = 0.0;  // M12 n1 n2 / 2 (weight of the 4-corner combination)
    double d1 = 0.0;      // n1 / 2 (central first-difference scale)
    double d2 = 0.0;      // n2 / 2

    StencilGeometry(const Lattice& lattice, int n1, int n2);

    // Largest eigenvalue bound of minus the discrete Laplacian, as the sum of
    // absolute stencil weights: |w_center| + sum |w_neighbor|.
    double laplacian_bound() const;
};

// Central-difference derivative of v chain-ruled to the Cartesian frame, plus
// the linear part B. Exact on affine maps. Requires n1, n2 >= 4.
GradientField gradient(const MapField& f);

// Component-wise Laplacian of the displacement (the linear part is harmonic).
VecGrid laplacian(const MapField& f);

// Cartesian second derivatives via central stencils; symmetric in the lower
// index pair by construction.
HessianField hessian(const MapField& f);

// One-sided first-order differences plus B; used by the discrete
// integration-by-parts check, which pairs the compact Laplacian with forward
// gradients.
GradientField forward_gradient(const MapField& f);

// Derivative operators for scalar grid functions over the same grid geometry
// (used for fields derived from Du, e.g. trace and rotation components).
VecGrid scalar_gradient(const ScalarGrid& g, const StencilGeometry& geom);
ScalarGrid scalar_laplacian(const ScalarGrid& g, const StencilGeometry& geom);

// Midpoint rule: mean of the samples times the torus area. Sequential
// summation in row-major order, so the result does not depend on how the
// integrand was produced.
double integrate(const ScalarGrid& g, const Lattice& domain);

// Text dump: header lines "n1 n2 t", the 4 entries of B, then the 8 entries of
// the two lattice bases (all column-major), followed by one "i j v1 v2" line
// per grid point, row-major. Floats are shortest-round-trip formatted, so a
// dump parses back bit-exactly.
void write_field_dump(std::ostream& out, const MapField& f);
MapField read_field_dump(std::istream& in);

}  // namespace difflow
