#include "difflow/field.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "difflow/format.hpp"
#include "difflow/parallel.hpp"

namespace difflow {

namespace {

void require_resolution(int n1, int n2) {
    if (n1 < 4 || n2 < 4) {
        throw std::invalid_argument("stencils need at least 4 points per direction");
    }
}

inline int next(int i, int n) { return i + 1 == n ? 0 : i + 1; }
inline int prev(int i, int n) { return i == 0 ? n - 1 : i - 1; }

// Shared loop shape for all stencil passes: body(i, j, ip, im, jp, jm, idx).
template <typename Body>
void stencil_pass(int n1, int n2, const Body& body) {
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t begin, std::size_t end) {
        for (int i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
            const int ip = next(i, n1);
            const int im = prev(i, n1);
            std::size_t idx = static_cast<std::size_t>(i) * n2;
            for (int j = 0; j < n2; ++j, ++idx) {
                body(i, j, ip, im, next(j, n2), prev(j, n2), idx);
            }
        }
    });
}

}  // namespace

MapField::MapField(TorusPair torus_pair, int rows, int cols)
    : pair(std::move(torus_pair)),
      n1(rows),
      n2(cols),
      v(static_cast<std::size_t>(rows) * cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid resolution must be positive");
}

StencilGeometry::StencilGeometry(const Lattice& lattice, int n1, int n2)
    : inv_basis(lattice.inverse_basis()) {
    const Mat2& a = inv_basis;
    const double m11 = a.a * a.a + a.c * a.c;
    const double m12 = a.a * a.b + a.c * a.d;
    const double m22 = a.b * a.b + a.d * a.d;
    c1 = m11 * n1 * n1;
    c2 = m22 * n2 * n2;
    ccross = 0.5 * m12 * n1 * n2;
    d1 = 0.5 * n1;
    d2 = 0.5 * n2;
}

double StencilGeometry::laplacian_bound() const {
    return 4.0 * c1 + 4.0 * c2 + 4.0 * std::abs(ccross);
}

GradientField gradient(const MapField& f) {
    require_resolution(f.n1, f.n2);
    const StencilGeometry geom(f.pair.domain, f.n1, f.n2);
    const Mat2& a = geom.inv_basis;
    const Mat2& b = f.pair.linear_part;
    GradientField out(f.n1, f.n2);
    const Vec2* v = f.v.data();
    stencil_pass(f.n1, f.n2, [&](int i, int j, int ip, int im, int jp, int jm, std::size_t idx) {
        const Vec2 g1 = (v[f.index(ip, j)] - v[f.index(im, j)]) * geom.d1;
        const Vec2 g2 = (v[f.index(i, jp)] - v[f.index(i, jm)]) * geom.d2;
        Mat2 du = b;
        du.a += g1.x * a.a + g2.x * a.b;
        du.b += g1.y * a.a + g2.y * a.b;
        du.c += g1.x * a.c + g2.x * a.d;
        du.d += g1.y * a.c + g2.y * a.d;
        out.cells[idx] = du;
    });
    return out;
}

VecGrid laplacian(const MapField& f) {
    require_resolution(f.n1, f.n2);
    const StencilGeometry geom(f.pair.domain, f.n1, f.n2);
    VecGrid out(f.n1, f.n2);
    const Vec2* v = f.v.data();
    const double center = -2.0 * (geom.c1 + geom.c2);
    stencil_pass(f.n1, f.n2, [&](int i, int j, int ip, int im, int jp, int jm, std::size_t idx) {
        Vec2 acc = geom.c1 * (v[f.index(ip, j)] + v[f.index(im, j)]) +
                   geom.c2 * (v[f.index(i, jp)] + v[f.index(i, jm)]) + center * v[idx];
        if (geom.ccross != 0.0) {
            acc += geom.ccross * (v[f.index(ip, jp)] - v[f.index(ip, jm)] - v[f.index(im, jp)] +
                                  v[f.index(im, jm)]);
        }
        out.cells[idx] = acc;
    });
    return out;
}

HessianField hessian(const MapField& f) {
    require_resolution(f.n1, f.n2);
    const StencilGeometry geom(f.pair.domain, f.n1, f.n2);
    const Mat2& a = geom.inv_basis;
    HessianField out(f.n1, f.n2);
    const Vec2* v = f.v.data();
    const double s11 = static_cast<double>(f.n1) * f.n1;
    const double s22 = static_cast<double>(f.n2) * f.n2;
    const double s12 = 0.25 * static_cast<double>(f.n1) * f.n2;
    stencil_pass(f.n1, f.n2, [&](int i, int j, int ip, int im, int jp, int jm, std::size_t idx) {
        const Vec2 center = v[idx];
        const Vec2 f11 = (v[f.index(ip, j)] - 2.0 * center + v[f.index(im, j)]) * s11;
        const Vec2 f22 = (v[f.index(i, jp)] - 2.0 * center + v[f.index(i, jm)]) * s22;
        const Vec2 f12 = (v[f.index(ip, jp)] - v[f.index(ip, jm)] - v[f.index(im, jp)] +
                          v[f.index(im, jm)]) *
                         s12;
        Hess2 h;
        for (int alpha = 0; alpha < 2; ++alpha) {
            const double g11 = alpha == 0 ? f11.x : f11.y;
            const double g22 = alpha == 0 ? f22.x : f22.y;
            const double g12 = alpha == 0 ? f12.x : f12.y;
            for (int p = 0; p < 2; ++p) {
                for (int q = p; q < 2; ++q) {
                    const double value = a(0, p) * a(0, q) * g11 +
                                         (a(0, p) * a(1, q) + a(1, p) * a(0, q)) * g12 +
                                         a(1, p) * a(1, q) * g22;
                    h.at(alpha, p, q) = value;
                    h.at(alpha, q, p) = value;
                }
            }
        }
        out.cells[idx] = h;
    });
    return out;
}

GradientField forward_gradient(const MapField& f) {
    require_resolution(f.n1, f.n2);
    const StencilGeometry geom(f.pair.domain, f.n1, f.n2);
    const Mat2& a = geom.inv_basis;
    const Mat2& b = f.pair.linear_part;
    GradientField out(f.n1, f.n2);
    const Vec2* v = f.v.data();
    stencil_pass(f.n1, f.n2, [&](int i, int j, int ip, int, int jp, int, std::size_t idx) {
        const Vec2 g1 = (v[f.index(ip, j)] - v[idx]) * static_cast<double>(f.n1);
        const Vec2 g2 = (v[f.index(i, jp)] - v[idx]) * static_cast<double>(f.n2);
        Mat2 du = b;
        du.a += g1.x * a.a + g2.x * a.b;
        du.b += g1.y * a.a + g2.y * a.b;
        du.c += g1.x * a.c + g2.x * a.d;
        du.d += g1.y * a.c + g2.y * a.d;
        out.cells[idx] = du;
    });
    return out;
}

VecGrid scalar_gradient(const ScalarGrid& g, const StencilGeometry& geom) {
    require_resolution(g.n1, g.n2);
    const Mat2& a = geom.inv_basis;
    VecGrid out(g.n1, g.n2);
    const double* v = g.cells.data();
    stencil_pass(g.n1, g.n2, [&](int i, int j, int ip, int im, int jp, int jm, std::size_t idx) {
        const double g1 = (v[g.index(ip, j)] - v[g.index(im, j)]) * geom.d1;
        const double g2 = (v[g.index(i, jp)] - v[g.index(i, jm)]) * geom.d2;
        out.cells[idx] = {g1 * a.a + g2 * a.b, g1 * a.c + g2 * a.d};
    });
    return out;
}

ScalarGrid scalar_laplacian(const ScalarGrid& g, const StencilGeometry& geom) {
    require_resolution(g.n1, g.n2);
    ScalarGrid out(g.n1, g.n2);
    const double* v = g.cells.data();
    const double center = -2.0 * (geom.c1 + geom.c2);
    stencil_pass(g.n1, g.n2, [&](int i, int j, int ip, int im, int jp, int jm, std::size_t idx) {
        double acc = geom.c1 * (v[g.index(ip, j)] + v[g.index(im, j)]) +
                     geom.c2 * (v[g.index(i, jp)] + v[g.index(i, jm)]) + center * v[idx];
        if (geom.ccross != 0.0) {
            acc += geom.ccross * (v[g.index(ip, jp)] - v[g.index(ip, jm)] - v[g.index(im, jp)] +
                                  v[g.index(im, jm)]);
        }
        out.cells[idx] = acc;
    });
    return out;
}

double integrate(const ScalarGrid& g, const Lattice& domain) {
    double sum = 0.0;
    for (const double value : g.cells) sum += value;
    return sum * (domain.cell_area() / (static_cast<double>(g.n1) * g.n2));
}

void write_field_dump(std::ostream& out, const MapField& f) {
    std::string line;
    line += std::to_string(f.n1);
    line += ' ';
    line += std::to_string(f.n2);
    line += ' ';
    append_double(line, f.time);
    line += '\n';
    const Mat2& b = f.pair.linear_part;
    for (const double entry : {b.a, b.b, b.c, b.d}) {
        append_double(line, entry);
        line += ' ';
    }
    line.back() = '\n';
    const Mat2& g1 = f.pair.domain.basis();
    const Mat2& g2 = f.pair.target.basis();
    for (const double entry : {g1.a, g1.b, g1.c, g1.d, g2.a, g2.b, g2.c, g2.d}) {
        append_double(line, entry);
        line += ' ';
    }
    line.back() = '\n';
    out << line;
    for (int i = 0; i < f.n1; ++i) {
        for (int j = 0; j < f.n2; ++j) {
            line.clear();
            line += std::to_string(i);
            line += ' ';
            line += std::to_string(j);
            line += ' ';
            const Vec2& value = f.at(i, j);
            append_double(line, value.x);
            line += ' ';
            append_double(line, value.y);
            line += '\n';
            out << line;
        }
    }
}

MapField read_field_dump(std::istream& in) {
    auto fail = [](const char* what) -> std::runtime_error {
        return std::runtime_error(std::string("field dump: ") + what);
    };
    int n1 = 0, n2 = 0;
    double time = 0.0;
    std::string token;
    if (!(in >> n1 >> n2 >> token)) throw fail("bad header line");
    time = parse_double(token);
    double be[4];
    for (double& entry : be) {
        if (!(in >> token)) throw fail("bad linear part");
        entry = parse_double(token);
    }
    double ge[8];
    for (double& entry : ge) {
        if (!(in >> token)) throw fail("bad lattice bases");
        entry = parse_double(token);
    }
    const Lattice domain(Mat2{ge[0], ge[1], ge[2], ge[3]});
    const Lattice target(Mat2{ge[4], ge[5], ge[6], ge[7]});
    MapField f(TorusPair{domain, target, Mat2{be[0], be[1], be[2], be[3]}}, n1, n2);
    f.time = time;
    for (std::size_t count = 0; count < f.v.size(); ++count) {
        int i = 0, j = 0;
        std::string sx, sy;
        if (!(in >> i >> j >> sx >> sy)) throw fail("truncated grid data");
        if (i < 0 || i >= n1 || j < 0 || j >= n2) throw fail("grid index out of range");
        f.at(i, j) = {parse_double(sx), parse_double(sy)};
    }
    return f;
}

}  // namespace difflow
