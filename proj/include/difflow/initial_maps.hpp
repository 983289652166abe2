#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "difflow/field.hpp"

namespace difflow {

// One Fourier mode of the periodic displacement, expressed in lattice
// coordinates xi = basis_domain^-1 x so that integer wave vectors are
// automatically periodic:
//   v(xi) += amplitude * sin(2 pi (k1 xi_1 + k2 xi_2) + phase).
struct ModeSpec {
    int k1 = 0;
    int k2 = 0;
    Vec2 amplitude{0.0, 0.0};
    double phase = 0.0;
};

// Samples B x + sum of modes on the n1 x n2 grid. The pair is validated
// (throws std::invalid_argument if B is not a lattice homomorphism).
MapField build_map(const TorusPair& pair, int n1, int n2, const std::vector<ModeSpec>& modes);

struct DiffeoCheck {
    bool ok = false;
    double min_det = 0.0;
    double min_lambda1 = 0.0;
    double max_lambda2 = 0.0;
};

// Scans the discrete gradient over the whole grid. ok iff every sample has
// positive determinant, i.e. the sampled map looks like an
// orientation-preserving local diffeomorphism at grid resolution.
DiffeoCheck check_diffeomorphism(const MapField& field);

// Canned initial data used by the studies and acceptance runs. All presets
// pass check_diffeomorphism at every resolution n >= 16.
MapField preset_identity_perturbed(int n);
MapField preset_shear(int n);
MapField preset_anisotropic(int n);
// Stays a diffeomorphism but starts close to degeneracy: the smallest
// singular value on the grid is about 0.05.
MapField preset_large_gradient(int n);

std::vector<std::string> preset_names();
std::optional<MapField> preset_by_name(std::string_view name, int n);

}  // namespace difflow
