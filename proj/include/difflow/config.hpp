#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "difflow/flow.hpp"
#include "difflow/initial_maps.hpp"

namespace difflow {

// Parsed form of the flat `key = value` config file. Unset keys keep these
// defaults. A preset replaces the explicit geometry and mode list.
struct RunSetup {
    FlowConfig flow;
    std::optional<std::string> preset;
    int n1 = 64;
    int n2 = 64;
    Mat2 domain_basis = Mat2::identity();
    Mat2 target_basis = Mat2::identity();
    IntMat2 linear_map = IntMat2::identity();
    std::vector<ModeSpec> modes;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::optional<double> c_slack;
};

// Accepted keys: preset, n, n1, n2, domain_basis (4 numbers, column-major),
// target_basis, linear_map (4 integers, column-major), mode (k1 k2 amp1 amp2
// phase; repeatable), flow_kind (paper_flow/paper or
// harmonic_heat_flow/hmhf), stepper (euler/rk2), cfl_safety, t_end, q_tol_rel,
// dt_override, diagnostics_stride, snapshot_stride, seed, out_dir, c_slack.
// '#' starts a comment. Throws std::runtime_error with a line-numbered
// message on anything malformed or unknown.
RunSetup parse_config(std::istream& in);
RunSetup parse_config_file(const std::string& path);

std::optional<FlowKind> parse_flow_kind(std::string_view token);
const char* flow_kind_name(FlowKind kind);

// Builds the initial field: the named preset when one is set (square grids
// only), otherwise the explicit lattice pair, integer linear map, and mode
// list. Throws std::runtime_error or std::invalid_argument on inconsistent
// setups.
MapField build_initial_map(const RunSetup& setup);

}  // namespace difflow
