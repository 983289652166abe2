#include "difflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "difflow/kinematics.hpp"
#include "difflow/parallel.hpp"

namespace difflow {

void RunningExtremes::merge_slice(double lmin, double lmax, double rmin, double rmax,
                                  double dmin, double wmax, double t, int i, int j, bool first) {
    if (first || lmin < lambda_min) {
        lambda_min = lmin;
        lambda_min_time = t;
        lambda_min_i = i;
        lambda_min_j = j;
    }
    if (first) {
        lambda_max = lmax;
        r_min = rmin;
        r_max = rmax;
        min_det = dmin;
        max_antisym = wmax;
    } else {
        lambda_max = std::max(lambda_max, lmax);
        r_min = std::min(r_min, rmin);
        r_max = std::max(r_max, rmax);
        min_det = std::min(min_det, dmin);
        max_antisym = std::max(max_antisym, wmax);
    }
}

namespace {

struct RowStats {
    double lmin = 0.0, lmax = 0.0, rmin = 0.0, rmax = 0.0, dmin = 0.0;
    double wmax = 0.0, cmax = 0.0;
    int lmin_j = 0, dmin_j = 0;
    bool bad = false;  // det <= 0, non-finite, or degenerate diffusion denominator
    int bad_j = 0;
};

// Everything the run loop needs from one sweep over Du: the stepping
// coefficient grid and deterministic per-row extrema merged in row order.
struct StepScan {
    ScalarGrid coeff;
    double lambda_min = 0.0, lambda_max = 0.0, r_min = 0.0, r_max = 0.0, min_det = 0.0;
    double max_antisym = 0.0, max_coeff = 0.0, q = 0.0;
    int lambda_min_i = 0, lambda_min_j = 0;
    bool bad = false;
    int bad_i = 0, bad_j = 0;
};

StepScan scan_state(const MapField& field, const GradientField& grad, const VecGrid& lap,
                    FlowKind kind) {
    const int n1 = grad.n1, n2 = grad.n2;
    StepScan scan;
    scan.coeff = ScalarGrid(n1, n2);
    std::vector<RowStats> rows(static_cast<std::size_t>(n1));
    const bool weighted = kind == FlowKind::paper_flow;

    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RowStats st;
            for (int j = 0; j < n2; ++j) {
                const std::size_t idx = i * static_cast<std::size_t>(n2) + j;
                const Mat2& du = grad.cells[idx];
                const Svd2 sv = svd2(du);
                const double d = det(du);
                const double s = du.a + du.d;
                const double w = du.b - du.c;
                const double r = std::hypot(s, w);
                const DiffusionCoefficient f = diffusion_coefficient(du);
                scan.coeff.cells[idx] = weighted ? f.value : 1.0;

                // Written so NaNs register as degeneracy rather than slipping
                // through a min().
                if (!(d > 0.0) || (weighted && f.degenerate)) {
                    if (!st.bad) {
                        st.bad = true;
                        st.bad_j = j;
                    }
                }
                if (j == 0) {
                    st.lmin = sv.lambda1;
                    st.lmax = sv.lambda2;
                    st.rmin = st.rmax = r;
                    st.dmin = d;
                    st.wmax = std::abs(w);
                    st.cmax = scan.coeff.cells[idx];
                } else {
                    if (sv.lambda1 < st.lmin) {
                        st.lmin = sv.lambda1;
                        st.lmin_j = j;
                    }
                    st.lmax = std::max(st.lmax, sv.lambda2);
                    st.rmin = std::min(st.rmin, r);
                    st.rmax = std::max(st.rmax, r);
                    if (d < st.dmin) {
                        st.dmin = d;
                        st.dmin_j = j;
                    }
                    st.wmax = std::max(st.wmax, std::abs(w));
                    st.cmax = std::max(st.cmax, scan.coeff.cells[idx]);
                }
            }
            rows[i] = st;
        }
    });

    for (int i = 0; i < n1; ++i) {
        const RowStats& st = rows[static_cast<std::size_t>(i)];
        if (i == 0 || st.lmin < scan.lambda_min) {
            scan.lambda_min = st.lmin;
            scan.lambda_min_i = i;
            scan.lambda_min_j = st.lmin_j;
        }
        if (i == 0) {
            scan.lambda_max = st.lmax;
            scan.r_min = st.rmin;
            scan.r_max = st.rmax;
            scan.min_det = st.dmin;
            scan.max_antisym = st.wmax;
            scan.max_coeff = st.cmax;
        } else {
            scan.lambda_max = std::max(scan.lambda_max, st.lmax);
            scan.r_min = std::min(scan.r_min, st.rmin);
            scan.r_max = std::max(scan.r_max, st.rmax);
            scan.min_det = std::min(scan.min_det, st.dmin);
            scan.max_antisym = std::max(scan.max_antisym, st.wmax);
            scan.max_coeff = std::max(scan.max_coeff, st.cmax);
        }
        if (st.bad && !scan.bad) {
            scan.bad = true;
            scan.bad_i = i;
            scan.bad_j = st.bad_j;
        }
    }

    double sum = 0.0;
    for (const Vec2& value : lap.cells) sum += norm2(value);
    scan.q = sum * (field.pair.domain.cell_area() / (static_cast<double>(n1) * n2));
    return scan;
}

void advance(MapField& field, const VecGrid& lap, const ScalarGrid& coeff, double dt) {
    Vec2* v = field.v.data();
    const Vec2* l = lap.cells.data();
    const double* c = coeff.cells.data();
    parallel_for(field.v.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) v[k] += l[k] * (dt * c[k]);
    });
}

ScalarGrid coefficient_grid(const MapField& field, FlowKind kind) {
    if (kind == FlowKind::harmonic_heat_flow) {
        ScalarGrid coeff(field.n1, field.n2);
        std::fill(coeff.cells.begin(), coeff.cells.end(), 1.0);
        return coeff;
    }
    const GradientField grad = gradient(field);
    ScalarGrid coeff(grad.n1, grad.n2);
    parallel_for(grad.cells.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            coeff.cells[k] = diffusion_coefficient(grad.cells[k]).value;
        }
    });
    return coeff;
}

void advance_step(MapField& field, FlowKind kind, Stepper stepper, double dt,
                  const VecGrid& lap, const ScalarGrid& coeff) {
    if (stepper == Stepper::euler) {
        advance(field, lap, coeff, dt);
    } else {
        MapField mid = field;
        advance(mid, lap, coeff, 0.5 * dt);
        const VecGrid lap_mid = laplacian(mid);
        const ScalarGrid coeff_mid = coefficient_grid(mid, kind);
        advance(field, lap_mid, coeff_mid, dt);
    }
    field.time += dt;
}

}  // namespace

DtBound max_stable_dt(const MapField& field, const StencilGeometry& geom, FlowKind kind,
                      double cfl_safety) {
    DtBound bound;
    bound.max_coeff = 1.0;
    if (kind == FlowKind::paper_flow) {
        const GradientField grad = gradient(field);
        double worst = 0.0;
        for (const Mat2& du : grad.cells) {
            const DiffusionCoefficient f = diffusion_coefficient(du);
            if (!(det(du) > 0.0) || f.degenerate) {
                bound.degenerate = true;
                worst = std::max(worst, 1.0);
            } else {
                worst = std::max(worst, f.value);
            }
        }
        bound.max_coeff = bound.degenerate ? 1.0 : worst;
    }
    bound.dt = cfl_safety * 2.0 / (bound.max_coeff * geom.laplacian_bound());
    return bound;
}

void step(MapField& field, FlowKind kind, Stepper stepper, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
    const VecGrid lap = laplacian(field);
    const ScalarGrid coeff = coefficient_grid(field, kind);
    advance_step(field, kind, stepper, dt, lap, coeff);
}

RunResult run(const MapField& initial, const FlowConfig& config, const RunCallbacks& callbacks) {
    if (!(config.cfl_safety > 0.0) || config.cfl_safety > 1.0) {
        throw std::invalid_argument("cfl_safety must be in (0, 1]");
    }
    if (!(config.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (config.diagnostics_stride < 1) {
        throw std::invalid_argument("diagnostics_stride must be at least 1");
    }
    if (config.snapshot_stride < 0) throw std::invalid_argument("snapshot_stride must be >= 0");
    if (config.dt_override && !(*config.dt_override > 0.0)) {
        throw std::invalid_argument("dt_override must be positive");
    }

    RunResult result{FlowState(initial), {}, StopReason::reached_t_end};
    FlowState& state = result.state;
    MapField& field = state.field;
    const StencilGeometry geom(field.pair.domain, field.n1, field.n2);
    const double t_eps = 1e-12 * std::max(1.0, config.t_end);
    double q0 = -1.0;

    for (;;) {
        const GradientField grad = gradient(field);
        const VecGrid lap = laplacian(field);
        const StepScan scan = scan_state(field, grad, lap, config.kind);

        state.extremes.merge_slice(scan.lambda_min, scan.lambda_max, scan.r_min, scan.r_max,
                                   scan.min_det, scan.max_antisym, field.time,
                                   scan.lambda_min_i, scan.lambda_min_j, state.step_count == 0);
        if (scan.bad && !state.degenerate_flag) {
            state.degenerate_flag = true;
            state.first_degenerate_step = state.step_count;
            state.first_degenerate_time = field.time;
            state.first_degenerate_i = scan.bad_i;
            state.first_degenerate_j = scan.bad_j;
        }
        if (q0 < 0.0) q0 = scan.q;

        bool stop = false;
        if (scan.bad && config.kind == FlowKind::paper_flow) {
            result.stop_reason = StopReason::degenerate;
            stop = true;
        } else if (config.q_tol_rel > 0.0 && scan.q < config.q_tol_rel * q0) {
            result.stop_reason = StopReason::converged;
            stop = true;
        } else if (field.time >= config.t_end - t_eps) {
            result.stop_reason = StopReason::reached_t_end;
            stop = true;
        }

        if (stop || state.step_count % config.diagnostics_stride == 0) {
            DiagnosticsRecord rec = compute_record(field, geom, grad, lap, scan.coeff);
            rec.degenerate = state.degenerate_flag;
            if (!result.series.empty() && rec.t > result.series.back().t) {
                rec.dE_dt_lhs =
                    (rec.E - result.series.back().E) / (rec.t - result.series.back().t);
            }
            result.series.push_back(rec);
            if (callbacks.on_record) callbacks.on_record(rec, field);
        }
        if (callbacks.on_snapshot && config.snapshot_stride > 0 &&
            (stop || state.step_count % config.snapshot_stride == 0)) {
            callbacks.on_snapshot(field);
        }
        if (stop) break;

        double dt = config.dt_override
                        ? *config.dt_override
                        : config.cfl_safety * 2.0 / (scan.max_coeff * geom.laplacian_bound());
        dt = std::min(dt, config.t_end - field.time);
        advance_step(field, config.kind, config.stepper, dt, lap, scan.coeff);
        ++state.step_count;
    }
    return result;
}

}  // namespace difflow
