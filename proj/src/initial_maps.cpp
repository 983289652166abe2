#include "difflow/initial_maps.hpp"

#include <cmath>
#include <numbers>

#include "difflow/kinematics.hpp"

namespace difflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

MapField build_map(const TorusPair& pair, int n1, int n2, const std::vector<ModeSpec>& modes) {
    MapField field(validated(pair), n1, n2);
    for (int i = 0; i < n1; ++i) {
        const double xi1 = static_cast<double>(i) / n1;
        for (int j = 0; j < n2; ++j) {
            const double xi2 = static_cast<double>(j) / n2;
            Vec2 v{0.0, 0.0};
            for (const ModeSpec& mode : modes) {
                const double angle = two_pi * (mode.k1 * xi1 + mode.k2 * xi2) + mode.phase;
                v = v + mode.amplitude * std::sin(angle);
            }
            field.at(i, j) = v;
        }
    }
    return field;
}

DiffeoCheck check_diffeomorphism(const MapField& field) {
    const GradientField grad = gradient(field);
    DiffeoCheck out;
    bool first = true;
    for (const Mat2& du : grad.cells) {
        const Svd2 decomp = svd2(du);
        const double d = det(du);
        if (first) {
            out.min_det = d;
            out.min_lambda1 = decomp.lambda1;
            out.max_lambda2 = decomp.lambda2;
            first = false;
        } else {
            out.min_det = std::min(out.min_det, d);
            out.min_lambda1 = std::min(out.min_lambda1, decomp.lambda1);
            out.max_lambda2 = std::max(out.max_lambda2, decomp.lambda2);
        }
    }
    out.ok = !first && out.min_det > 0.0;
    return out;
}

MapField preset_identity_perturbed(int n) {
    const Lattice square = Lattice::unit_square();
    const TorusPair pair = make_torus_pair(square, square, IntMat2::identity());
    return build_map(pair, n, n,
                     {{1, 0, {0.02, 0.01}, 0.3},
                      {0, 1, {-0.012, 0.018}, 1.1},
                      {1, 1, {0.008, -0.006}, 2.0}});
}

MapField preset_shear(int n) {
    const Lattice square = Lattice::unit_square();
    const TorusPair pair = make_torus_pair(square, square, IntMat2{1, 0, 1, 1});
    return build_map(pair, n, n,
                     {{1, 0, {0.015, 0.01}, 0.0},
                      {0, 1, {-0.01, 0.012}, 0.7},
                      {1, -1, {0.006, 0.005}, 1.9}});
}

MapField preset_anisotropic(int n) {
    const Lattice square = Lattice::unit_square();
    const Lattice stretched(Mat2{2.0, 0.0, 0.0, 1.0});
    const TorusPair pair = make_torus_pair(square, stretched, IntMat2::identity());
    return build_map(pair, n, n,
                     {{1, 0, {0.02, 0.008}, 0.5},
                      {0, 1, {0.01, -0.015}, 1.3}});
}

MapField preset_large_gradient(int n) {
    const Lattice square = Lattice::unit_square();
    const TorusPair pair = make_torus_pair(square, square, IntMat2::identity());
    return build_map(pair, n, n,
                     {{1, 0, {0.95 / two_pi, 0.0}, 0.0},
                      {0, 1, {0.0, 0.3 / two_pi}, 0.0}});
}

std::vector<std::string> preset_names() {
    return {"identity-perturbed", "shear", "anisotropic", "large-gradient"};
}

std::optional<MapField> preset_by_name(std::string_view name, int n) {
    if (name == "identity-perturbed") return preset_identity_perturbed(n);
    if (name == "shear") return preset_shear(n);
    if (name == "anisotropic") return preset_anisotropic(n);
    if (name == "large-gradient") return preset_large_gradient(n);
    return std::nullopt;
}

}  // namespace difflow
