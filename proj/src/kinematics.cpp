#include "difflow/kinematics.hpp"

#include <cmath>

namespace difflow {

Svd2 svd2(const Mat2& du) {
    // du(1,0) - du(0,1) is the rotation component u^2_1 - u^1_2.
    const double s = du.a + du.d;
    const double w = du.b - du.c;
    const double p = du.a - du.d;
    const double q = du.b + du.c;
    const double big_q = 0.5 * std::hypot(s, w);
    const double big_r = 0.5 * std::hypot(p, q);

    Svd2 out;
    out.lambda2 = big_q + big_r;
    out.lambda1 = std::abs(big_q - big_r);

    // Split du = Q rot(theta) + R ref(phi); the singular frames are rotations
    // by the half-sum and half-difference of the two angles. e1 is e2 turned
    // by -90 degrees so the ordered pair (e1, e2) stays positively oriented;
    // atan2(0, 0) = 0 keeps fully degenerate inputs on a quarter turn of the
    // standard basis.
    const double theta = std::atan2(w, s);
    const double phi = std::atan2(q, p);
    const double mu = 0.5 * (phi + theta);
    const double nu = 0.5 * (phi - theta);
    const double cmu = std::cos(mu), smu = std::sin(mu);
    const double cnu = std::cos(nu), snu = std::sin(nu);
    out.frames.e2 = {cnu, snu};
    out.frames.e1 = {snu, -cnu};
    out.frames.v2 = {cmu, smu};
    // du e1 = (Q - R) (sin mu, -cos mu); flip v1 when that scalar is negative
    // so that du e1 = lambda1 v1 with lambda1 >= 0.
    if (big_q >= big_r) {
        out.frames.v1 = {smu, -cmu};
    } else {
        out.frames.v1 = {-smu, cmu};
    }
    return out;
}

PolarParts polar_decompose(const Mat2& du) {
    const double s = du.a + du.d;
    const double w = du.b - du.c;
    PolarParts out;
    out.r = std::hypot(s, w);
    out.degenerate = !(out.r >= 1e-14);
    out.theta = out.degenerate ? 0.0 : std::atan2(w, s);
    return out;
}

DiffusionCoefficient diffusion_coefficient(const Mat2& du) {
    const double denom = frobenius2(du) + 2.0 * det(du);
    DiffusionCoefficient out;
    out.degenerate = !(denom >= 1e-20);
    out.value = 1.0 / denom;
    return out;
}

Sym2 induced_metric(const Mat2& du) {
    return {du.a * du.a + du.b * du.b, du.a * du.c + du.b * du.d, du.c * du.c + du.d * du.d};
}

PointKinematics point_kinematics(const Mat2& du) {
    PointKinematics out;
    out.du = du;
    const Svd2 svd = svd2(du);
    out.lambda1 = svd.lambda1;
    out.lambda2 = svd.lambda2;
    const PolarParts polar = polar_decompose(du);
    out.r = polar.r;
    out.theta = polar.theta;
    const DiffusionCoefficient f = diffusion_coefficient(du);
    out.F = f.value;
    out.det = det(du);
    out.h = induced_metric(du);
    out.degenerate = polar.degenerate || f.degenerate;
    return out;
}

}  // namespace difflow
