#pragma once

#include "difflow/geometry.hpp"

namespace difflow {

// A rank-2 lattice Gamma = basis * Z^2 describing a flat torus R^2 / Gamma.
// Basis columns are the generators; the basis must be oriented (det > 0).
class Lattice {
  public:
    explicit Lattice(const Mat2& basis);

    static Lattice unit_square() { return Lattice(Mat2::identity()); }

    const Mat2& basis() const { return basis_; }
    const Mat2& inverse_basis() const { return inverse_; }
    double cell_area() const { return area_; }

    Vec2 to_lattice(const Vec2& x) const { return inverse_ * x; }
    Vec2 from_lattice(const Vec2& xi) const { return basis_ * xi; }

    // Reduces x into the half-open fundamental parallelogram anchored at the
    // origin by subtracting an integer combination of the basis columns.
    // Points already inside come back bit-identical, so wrap is idempotent.
    // The reduction is exact in lattice coordinates; re-deriving them from
    // the returned Cartesian point can show rounding fuzz on the order of
    // the input magnitude times machine epsilon.
    Vec2 wrap(const Vec2& x) const;

  private:
    Mat2 basis_;
    Mat2 inverse_;
    double area_;
};

inline Vec2 wrap(const Lattice& lattice, const Vec2& x) { return lattice.wrap(x); }

// Integer 2x2 matrix, column-major like Mat2.
struct IntMat2 {
    int a = 0, b = 0, c = 0, d = 0;

    static constexpr IntMat2 identity() { return {1, 0, 0, 1}; }

    constexpr bool operator==(const IntMat2&) const = default;
};

constexpr IntMat2 operator*(const IntMat2& m, const IntMat2& n) {
    return {m.a * n.a + m.c * n.b, m.b * n.a + m.d * n.b,
            m.a * n.c + m.c * n.d, m.b * n.c + m.d * n.d};
}

inline Mat2 to_mat2(const IntMat2& m) {
    return {static_cast<double>(m.a), static_cast<double>(m.b),
            static_cast<double>(m.c), static_cast<double>(m.d)};
}

// A pair of tori together with the linear part B of maps between them.
// u(x + z) = u(x) + B z for z in the domain lattice, which forces B to send
// the domain lattice into the target lattice.
struct TorusPair {
    Lattice domain;
    Lattice target;
    Mat2 linear_part;
};

struct HomomorphismCheck {
    bool ok = false;
    IntMat2 integer_part;
    // Largest distance from an entry of basis_target^-1 * B * basis_domain to
    // its nearest integer.
    double max_deviation = 0.0;
};

// Verifies that B maps the domain lattice into the target lattice, returning
// the integer matrix expressing B in the lattice bases. When the pair is meant
// to hold diffeomorphisms, a singular B is rejected as well.
HomomorphismCheck check_homomorphism(const TorusPair& pair, bool diffeomorphism_class = true);

// check_homomorphism that throws std::invalid_argument instead of reporting.
TorusPair validated(TorusPair pair, bool diffeomorphism_class = true);

// Builds the pair whose linear part is the integer matrix k in the lattice
// bases: B = basis_target * k * basis_domain^-1.
TorusPair make_torus_pair(const Lattice& domain, const Lattice& target, const IntMat2& k);

}  // namespace difflow
