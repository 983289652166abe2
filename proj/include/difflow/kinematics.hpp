#pragma once

#include "difflow/geometry.hpp"

namespace difflow {

// Orthonormal singular frames: du maps e_i to lambda_i v_i. The e frame is
// always a proper rotation of the standard basis; v picks up a reflection when
// det(du) < 0.
struct SvdFrames {
    Vec2 e1, e2;
    Vec2 v1, v2;
};

struct Svd2 {
    double lambda1 = 0.0;  // smaller singular value
    double lambda2 = 0.0;
    SvdFrames frames;
};

// Closed-form 2x2 SVD. With s = u11 + u22, w = u21 - u12, p = u11 - u22,
// q = u21 + u12 the conformal and anticonformal radii are Q = sqrt(s^2+w^2)/2
// and R = sqrt(p^2+q^2)/2, and the singular values are Q + R and |Q - R|.
// Works for any matrix, including singular and orientation-reversing ones.
Svd2 svd2(const Mat2& du);

// Polar data of the conformal part: r = lambda1 + lambda2 and the rotation
// angle theta in (-pi, pi]. Meaningful on the det > 0 branch; theta is
// undefined (and flagged) when r falls below 1e-14.
struct PolarParts {
    double r = 0.0;
    double theta = 0.0;
    bool degenerate = false;
};

PolarParts polar_decompose(const Mat2& du);

// Diffusion coefficient F = 1 / (|du|^2 + 2 det du) = (lambda1 + lambda2)^-2.
struct DiffusionCoefficient {
    double value = 0.0;
    bool degenerate = false;  // denominator below 1e-20
};

DiffusionCoefficient diffusion_coefficient(const Mat2& du);

// Pullback metric h = du^T du.
Sym2 induced_metric(const Mat2& du);

// Everything the diagnostics need about Du at one point.
struct PointKinematics {
    Mat2 du;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double F = 0.0;
    double det = 0.0;
    Sym2 h;
    bool degenerate = false;
};

PointKinematics point_kinematics(const Mat2& du);

}  // namespace difflow
