#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "difflow/diagnostics.hpp"
#include "difflow/field.hpp"

namespace difflow {

// paper_flow integrates d_t u = F(Du) lap u with F = (|Du|^2 + 2 det Du)^-1;
// harmonic_heat_flow is the comparison d_t u = lap u. The names are the config
// tokens accepted by the CLI and config file.
enum class FlowKind { paper_flow, harmonic_heat_flow };
enum class Stepper { euler, rk2 };

struct FlowConfig {
    FlowKind kind = FlowKind::paper_flow;
    Stepper stepper = Stepper::rk2;
    double cfl_safety = 0.8;
    double t_end = 1.0;
    // Stop when q drops below q_tol_rel * q(0); 0 disables the stop.
    double q_tol_rel = 1e-12;
    // Fixed time step for convergence-order studies; still capped by t_end.
    std::optional<double> dt_override;
    int diagnostics_stride = 8;
    int snapshot_stride = 0;  // 0 = no snapshots
};

// Running extremes over every step of the run (not just sampled records), with
// the time and grid location of the worst singular-value drop.
struct RunningExtremes {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double min_det = 0.0;
    double max_antisym = 0.0;  // sup |u^2_1 - u^1_2|
    double lambda_min_time = 0.0;
    int lambda_min_i = 0;
    int lambda_min_j = 0;

    void merge_slice(double lmin, double lmax, double rmin, double rmax, double dmin,
                     double wmax, double t, int i, int j, bool first);
};

enum class StopReason { reached_t_end, converged, degenerate };

struct FlowState {
    explicit FlowState(MapField f) : field(std::move(f)) {}

    MapField field;
    long step_count = 0;
    bool degenerate_flag = false;
    long first_degenerate_step = -1;
    double first_degenerate_time = 0.0;
    int first_degenerate_i = 0;
    int first_degenerate_j = 0;
    RunningExtremes extremes;
};

// Largest stable explicit step for the current field: the von Neumann bound
// 2 / (max coeff * |stencil|_1) scaled by cfl_safety, where |stencil|_1 bounds
// the discrete Laplacian's spectrum. Under the comparison flow the
// coefficient is 1. A degenerate diffusion coefficient (det Du <= 0 on the
// grid) falls back to the coeff = 1 bound and reports it.
struct DtBound {
    double dt = 0.0;
    double max_coeff = 0.0;
    bool degenerate = false;
};

DtBound max_stable_dt(const MapField& field, const StencilGeometry& geom, FlowKind kind,
                      double cfl_safety);

// One explicit step (forward Euler or midpoint RK2) of size dt. The linear
// part B never changes; the periodic displacement carries the whole motion.
void step(MapField& field, FlowKind kind, Stepper stepper, double dt);

struct RunCallbacks {
    // Called on every appended diagnostics record, including the initial and
    // final ones.
    std::function<void(const DiagnosticsRecord&, const MapField&)> on_record;
    // Called every snapshot_stride steps (and on the final state) when
    // snapshot_stride > 0.
    std::function<void(const MapField&)> on_snapshot;
};

struct RunResult {
    FlowState state;
    std::vector<DiagnosticsRecord> series;
    StopReason stop_reason = StopReason::reached_t_end;
};

// Integrates from the initial field until t_end, convergence (q < q_tol_rel
// q(0)), or degeneracy. Degeneracy stops paper_flow immediately (stepping
// through det Du <= 0 would be meaningless); the comparison flow records the
// first occurrence and keeps going. Diagnostics records are appended for the
// initial state, every diagnostics_stride-th step, and the final state.
RunResult run(const MapField& initial, const FlowConfig& config,
              const RunCallbacks& callbacks = {});

}  // namespace difflow
