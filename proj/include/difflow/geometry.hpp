#pragma once

#include <array>
#include <cmath>

namespace difflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }

// Column-major 2x2 matrix: columns are images of the basis vectors, so
// m(i, j) is row i, column j and m * v applies the linear map.
struct Mat2 {
    // a c
    // b d   stored as columns (a, b), (c, d)
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr double operator()(int row, int col) const {
        return col == 0 ? (row == 0 ? a : b) : (row == 0 ? c : d);
    }
    constexpr double& operator()(int row, int col) {
        return col == 0 ? (row == 0 ? a : b) : (row == 0 ? c : d);
    }

    constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a, b} : Vec2{c, d}; }
    constexpr Vec2 row(int i) const { return i == 0 ? Vec2{a, c} : Vec2{b, d}; }

    constexpr Mat2& operator+=(const Mat2& o) {
        a += o.a; b += o.b; c += o.c; d += o.d; return *this;
    }
    constexpr Mat2& operator-=(const Mat2& o) {
        a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this;
    }
    constexpr Mat2& operator*=(double s) { a *= s; b *= s; c *= s; d *= s; return *this; }
};

constexpr Mat2 operator+(Mat2 m, const Mat2& o) { return m += o; }
constexpr Mat2 operator-(Mat2 m, const Mat2& o) { return m -= o; }
constexpr Mat2 operator*(double s, Mat2 m) { return m *= s; }

constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a * v.x + m.c * v.y, m.b * v.x + m.d * v.y};
}

constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.c * n.b, m.b * n.a + m.d * n.b,
            m.a * n.c + m.c * n.d, m.b * n.c + m.d * n.d};
}

constexpr double det(const Mat2& m) { return m.a * m.d - m.c * m.b; }
constexpr double trace(const Mat2& m) { return m.a + m.d; }
constexpr double frobenius2(const Mat2& m) {
    return m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
}
constexpr Mat2 transpose(const Mat2& m) { return {m.a, m.c, m.b, m.d}; }

inline Mat2 inverse(const Mat2& m) {
    const double dd = det(m);
    return {m.d / dd, -m.b / dd, -m.c / dd, m.a / dd};
}

inline Mat2 rotation(double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    return {cs, sn, -sn, cs};
}

// Symmetric 2x2 matrix (metric tensors, Hessians of scalars).
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    constexpr double operator()(int i, int j) const {
        return i == j ? (i == 0 ? xx : yy) : xy;
    }
};

constexpr Sym2 operator-(const Sym2& p, const Sym2& q) {
    return {p.xx - q.xx, p.xy - q.xy, p.yy - q.yy};
}

// Second derivatives of a plane-valued map: d[alpha][j][k] = d^2 u^alpha / dx^j dx^k,
// symmetric in (j, k).
struct Hess2 {
    std::array<std::array<std::array<double, 2>, 2>, 2> d{};

    constexpr double operator()(int alpha, int j, int k) const { return d[alpha][j][k]; }
    constexpr double& at(int alpha, int j, int k) { return d[alpha][j][k]; }
};

inline double frobenius2(const Hess2& h) {
    double s = 0.0;
    for (int alpha = 0; alpha < 2; ++alpha)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) s += h(alpha, j, k) * h(alpha, j, k);
    return s;
}

}  // namespace difflow
