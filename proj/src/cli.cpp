#include "difflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "difflow/config.hpp"
#include "difflow/diagnostics.hpp"
#include "difflow/format.hpp"
#include "difflow/initial_maps.hpp"
#include "difflow/kinematics.hpp"
#include "difflow/oracle.hpp"

namespace difflow {

namespace {

std::string pad_index(int k) {
    std::string digits = std::to_string(k);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return digits;
}

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::converged: return "converged";
        case StopReason::degenerate: return "degenerate";
        default: return "reached_t_end";
    }
}

double grid_spacing(const MapField& field) {
    const Mat2& basis = field.pair.domain.basis();
    return std::max(norm(basis.col(0)) / field.n1, norm(basis.col(1)) / field.n2);
}

RunSetup load_setup(const std::optional<std::string>& config_path) {
    return config_path ? parse_config_file(*config_path) : RunSetup{};
}

bool write_text_file(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) {
        err << "cannot write '" << path << "'\n";
        return false;
    }
    return true;
}

bool ensure_directory(const std::string& path, std::ostream& err) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) {
        err << "cannot create output directory '" << path << "': " << ec.message() << '\n';
        return false;
    }
    return true;
}

void append_kv(std::string& text, const char* key, double value) {
    text += key;
    text += ": ";
    append_double(text, value);
    text += '\n';
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    RunSetup setup;
    std::optional<MapField> initial;
    try {
        setup = load_setup(options.config_path);
        if (options.preset) setup.preset = *options.preset;
        if (options.flow) setup.flow.kind = *options.flow;
        if (options.seed) setup.seed = *options.seed;
        if (options.out_dir) setup.out_dir = *options.out_dir;
        initial.emplace(build_initial_map(setup));
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 3;
    }

    const DiffeoCheck check = check_diffeomorphism(*initial);
    if (!check.ok && setup.flow.kind == FlowKind::paper_flow) {
        err << "initial map is not a diffeomorphism at grid resolution (min det Du = "
            << format_double(check.min_det) << ")\n";
        return 3;
    }

    if (!ensure_directory(setup.out_dir, err)) return 3;

    int snapshot_index = 0;
    RunCallbacks callbacks;
    callbacks.on_snapshot = [&](const MapField& field) {
        const std::string path =
            setup.out_dir + "/snapshot_" + pad_index(snapshot_index++) + ".field";
        std::ofstream file(path, std::ios::binary);
        write_field_dump(file, field);
    };

    std::optional<RunResult> run_result;
    try {
        run_result.emplace(run(*initial, setup.flow, callbacks));
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 3;
    }
    RunResult& result = *run_result;

    {
        std::ofstream csv(setup.out_dir + "/diagnostics.csv", std::ios::binary);
        write_diagnostics_csv(csv, result.series);
        if (!csv) {
            err << "cannot write '" << setup.out_dir << "/diagnostics.csv'\n";
            return 3;
        }
    }
    {
        std::ofstream dump(setup.out_dir + "/final.field", std::ios::binary);
        write_field_dump(dump, result.state.field);
    }

    const FlowState& state = result.state;
    const DiagnosticsRecord& last = result.series.back();
    std::string summary;
    summary += "flow_kind: ";
    summary += flow_kind_name(setup.flow.kind);
    summary += '\n';
    summary += "grid: " + std::to_string(initial->n1) + " x " + std::to_string(initial->n2) + '\n';
    summary += "steps: " + std::to_string(state.step_count) + '\n';
    append_kv(summary, "final_time", state.field.time);
    summary += "stop_reason: ";
    summary += stop_reason_name(result.stop_reason);
    summary += '\n';
    append_kv(summary, "final_E", last.E);
    append_kv(summary, "final_q", last.q);
    append_kv(summary, "affine_residual", last.affine_residual);
    {
        const Svd2 limit = svd2(initial->pair.linear_part);
        append_kv(summary, "limit_lambda1", limit.lambda1);
        append_kv(summary, "limit_lambda2", limit.lambda2);
        append_kv(summary, "final_lambda_min", last.lambda_min);
        append_kv(summary, "final_lambda_max", last.lambda_max);
    }
    {
        std::vector<std::pair<double, double>> tq;
        tq.reserve(result.series.size());
        for (const DiagnosticsRecord& rec : result.series) tq.emplace_back(rec.t, rec.q);
        const DecayFit fit = fit_decay_rate(tq);
        if (fit.ok) {
            append_kv(summary, "decay_omega", fit.omega);
            append_kv(summary, "decay_quality", fit.quality);
        } else {
            summary += "decay: insufficient-data\n";
        }
    }
    {
        const BoundReport bounds =
            bound_preservation(result.series, grid_spacing(*initial), setup.c_slack);
        append_kv(summary, "bound_slack", bounds.slack);
        append_kv(summary, "bound_lower_excursion", bounds.lower_excursion);
        append_kv(summary, "bound_upper_excursion", bounds.upper_excursion);
        summary += "bound_verdict: ";
        summary += bounds.ok ? "ok" : "violated";
        summary += '\n';
    }
    append_kv(summary, "lambda_envelope", lambda_envelope(result.series));
    append_kv(summary, "min_det_overall", state.extremes.min_det);
    append_kv(summary, "max_antisym", state.extremes.max_antisym);
    if (state.degenerate_flag) {
        summary += "first_degenerate: step=" + std::to_string(state.first_degenerate_step) +
                   " t=" + format_double(state.first_degenerate_time) +
                   " i=" + std::to_string(state.first_degenerate_i) +
                   " j=" + std::to_string(state.first_degenerate_j) + '\n';
    }

    out << summary;
    if (!write_text_file(setup.out_dir + "/summary.txt", summary, err)) return 3;

    if (result.stop_reason == StopReason::degenerate) {
        err << "flow became degenerate (det Du <= 0) at step "
            << state.first_degenerate_step << ", t = "
            << format_double(state.first_degenerate_time) << ", grid point ("
            << state.first_degenerate_i << ", " << state.first_degenerate_j << ")\n";
        return 2;
    }
    return 0;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
    if (options.trials < 1) {
        err << "trials must be at least 1\n";
        return 3;
    }
    const std::vector<IdentityCheck> table =
        run_oracle_checks(options.seed, options.trials, options.tolerance);
    int passed = 0;
    for (const IdentityCheck& row : table) {
        out << (row.pass ? "PASS" : "FAIL") << "  " << row.name << ": trials="
            << row.trials << " max_residual=" << format_double(row.max_residual)
            << " tolerance=" << format_double(row.tolerance) << '\n';
        if (row.pass) ++passed;
    }
    out << "verify: " << passed << "/" << table.size()
        << (passed == static_cast<int>(table.size()) ? " PASS" : " FAIL") << '\n';
    return passed == static_cast<int>(table.size()) ? 0 : 1;
}

namespace {

struct StudyContext {
    RunSetup setup;
    std::string out_dir;
};

MapField study_initial(const StudyContext& ctx, int n) {
    if (ctx.setup.preset) {
        std::optional<MapField> field = preset_by_name(*ctx.setup.preset, n);
        if (!field) {
            throw std::runtime_error("config: unknown preset '" + *ctx.setup.preset + "'");
        }
        return *std::move(field);
    }
    RunSetup scaled = ctx.setup;
    scaled.n1 = scaled.n2 = n;
    return build_initial_map(scaled);
}

int refinement_study(const StudyContext& ctx, std::ostream& out, std::ostream& err) {
    struct Row {
        int n;
        double discrepancy;
        double residual_theta;
        double residual_r;
    };
    std::vector<Row> rows;
    for (const int n : {32, 64, 128}) {
        const Lattice square = Lattice::unit_square();
        const TorusPair pair = make_torus_pair(square, square, IntMat2::identity());
        const MapField initial = build_map(
            pair, n, n, {{1, 0, {0.01, 0.006}, 0.3}, {0, 1, {-0.005, 0.009}, 1.1}});
        FlowConfig cfg = ctx.setup.flow;
        cfg.t_end = 0.1;
        cfg.q_tol_rel = 0.0;
        cfg.diagnostics_stride = 1;
        cfg.snapshot_stride = 0;
        std::optional<RunResult> cell;
        try {
            cell.emplace(run(initial, cfg));
        } catch (const std::exception& e) {
            err << "refinement cell n=" << n << ": " << e.what() << '\n';
            return 3;
        }
        const RunResult& result = *cell;
        double scale = 0.0;
        for (const DiagnosticsRecord& rec : result.series) {
            scale = std::max(scale, std::abs(rec.dE_dt_rhs));
        }
        if (scale == 0.0) scale = 1.0;
        Row row{n, 0.0, 0.0, 0.0};
        for (std::size_t k = 1; k < result.series.size(); ++k) {
            row.discrepancy = std::max(
                row.discrepancy,
                energy_identity_check(result.series[k - 1], result.series[k]) / scale);
        }
        for (const DiagnosticsRecord& rec : result.series) {
            row.residual_theta = std::max(row.residual_theta, rec.residual_theta);
            row.residual_r = std::max(row.residual_r, rec.residual_r);
        }
        rows.push_back(row);
    }

    std::string csv = "n,energy_identity_discrepancy,residual_theta_sup,residual_r_sup\n";
    for (const Row& row : rows) {
        csv += std::to_string(row.n);
        csv.push_back(',');
        append_double(csv, row.discrepancy);
        csv.push_back(',');
        append_double(csv, row.residual_theta);
        csv.push_back(',');
        append_double(csv, row.residual_r);
        csv.push_back('\n');
    }
    if (!write_text_file(ctx.out_dir + "/refinement.csv", csv, err)) return 3;

    auto order = [](double coarse, double fine) { return std::log2(coarse / fine); };
    out << "energy identity order (32->64, 64->128): "
        << format_double(order(rows[0].discrepancy, rows[1].discrepancy)) << ", "
        << format_double(order(rows[1].discrepancy, rows[2].discrepancy)) << '\n';
    out << "residual_theta order: "
        << format_double(order(rows[0].residual_theta, rows[1].residual_theta)) << ", "
        << format_double(order(rows[1].residual_theta, rows[2].residual_theta)) << '\n';
    out << "residual_r order: "
        << format_double(order(rows[0].residual_r, rows[1].residual_r)) << ", "
        << format_double(order(rows[1].residual_r, rows[2].residual_r)) << '\n';
    return 0;
}

const char* holder_quantity_name(HolderQuantity quantity) {
    switch (quantity) {
        case HolderQuantity::radial: return "r";
        case HolderQuantity::angle: return "theta";
        default: return "F";
    }
}

int holder_study(const StudyContext& ctx, std::ostream& out, std::ostream& err) {
    const std::vector<double> radii = {0.04, 0.08, 0.16, 0.32};
    const std::vector<double> alphas = {0.25, 0.5, 0.75};
    const double window_start = 0.04;
    std::vector<std::pair<int, double>> f_half;  // (n, seminorm of F at alpha 0.5)

    for (const int n : {32, 64, 128}) {
        MapField initial = study_initial(ctx, n);
        const StencilGeometry geom(initial.pair.domain, n, n);
        const double dt0 =
            max_stable_dt(initial, geom, ctx.setup.flow.kind, ctx.setup.flow.cfl_safety).dt;
        FlowConfig cfg = ctx.setup.flow;
        cfg.t_end = 0.15;
        cfg.q_tol_rel = 0.0;
        cfg.diagnostics_stride = 1 << 20;
        cfg.snapshot_stride = std::max(1, static_cast<int>(std::floor(5e-4 / dt0)));

        SpaceTimeSamples samples(initial.pair.domain, n, n);
        RunCallbacks callbacks;
        callbacks.on_snapshot = [&](const MapField& field) {
            if (field.time >= window_start) samples.add_slice(field.time, gradient(field));
        };
        try {
            run(initial, cfg, callbacks);
        } catch (const std::exception& e) {
            err << "holder cell n=" << n << ": " << e.what() << '\n';
            return 3;
        }

        for (const HolderQuantity quantity :
             {HolderQuantity::radial, HolderQuantity::angle, HolderQuantity::diffusion}) {
            std::vector<HolderReport> reports;
            for (const double alpha : alphas) {
                reports.push_back(holder_seminorm(samples, quantity, alpha, radii));
            }
            std::ostringstream path;
            path << ctx.out_dir << "/holder_" << holder_quantity_name(quantity) << "_n" << n
                 << ".csv";
            std::ofstream file(path.str(), std::ios::binary);
            write_holder_csv(file, reports);
            if (!file) {
                err << "cannot write '" << path.str() << "'\n";
                return 3;
            }
            if (quantity == HolderQuantity::diffusion) {
                f_half.emplace_back(n, reports[1].seminorm);
                if (reports[1].insufficient_resolution) {
                    out << "n=" << n << ": insufficient resolution for 4 radii\n";
                }
            }
        }
    }

    double lo = f_half.front().second, hi = f_half.front().second;
    for (const auto& [n, seminorm] : f_half) {
        out << "F seminorm (alpha=0.5) at n=" << n << ": " << format_double(seminorm) << '\n';
        lo = std::min(lo, seminorm);
        hi = std::max(hi, seminorm);
    }
    out << "F seminorm spread across n: " << format_double(hi == 0.0 ? 0.0 : (hi - lo) / hi)
        << '\n';
    return 0;
}

int decay_study(const StudyContext& ctx, std::ostream& out, std::ostream& err) {
    std::string csv = "n,omega,quality,points\n";
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const int n : {32, 64, 128}) {
        MapField initial = study_initial(ctx, n);
        FlowConfig cfg = ctx.setup.flow;
        cfg.t_end = std::max(cfg.t_end, 2.0);
        cfg.q_tol_rel = 1e-12;
        cfg.diagnostics_stride = 4;
        cfg.snapshot_stride = 0;
        std::optional<RunResult> cell;
        try {
            cell.emplace(run(initial, cfg));
        } catch (const std::exception& e) {
            err << "decay cell n=" << n << ": " << e.what() << '\n';
            return 3;
        }
        std::vector<std::pair<double, double>> tq;
        for (const DiagnosticsRecord& rec : cell->series) tq.emplace_back(rec.t, rec.q);
        const DecayFit fit = fit_decay_rate(tq);
        csv += std::to_string(n);
        csv.push_back(',');
        append_double(csv, fit.omega);
        csv.push_back(',');
        append_double(csv, fit.quality);
        csv.push_back(',');
        csv += std::to_string(fit.points);
        csv.push_back('\n');
        out << "n=" << n << ": omega=" << format_double(fit.omega)
            << " quality=" << format_double(fit.quality) << '\n';
        if (first) {
            lo = hi = fit.omega;
            first = false;
        } else {
            lo = std::min(lo, fit.omega);
            hi = std::max(hi, fit.omega);
        }
    }
    if (!write_text_file(ctx.out_dir + "/decay.csv", csv, err)) return 3;
    out << "omega spread across n: " << format_double(hi == 0.0 ? 0.0 : (hi - lo) / hi) << '\n';
    return 0;
}

}  // namespace

int cmd_study(const StudyOptions& options, std::ostream& out, std::ostream& err) {
    StudyContext ctx;
    try {
        ctx.setup = load_setup(options.config_path);
        if (options.preset) ctx.setup.preset = *options.preset;
        if (options.flow) ctx.setup.flow.kind = *options.flow;
        if (options.seed) ctx.setup.seed = *options.seed;
        if (options.out_dir) ctx.setup.out_dir = *options.out_dir;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 3;
    }
    ctx.out_dir = ctx.setup.out_dir;
    if (!ensure_directory(ctx.out_dir, err)) return 3;

    if (options.kind == "refinement") return refinement_study(ctx, out, err);
    if (options.kind == "holder") {
        if (!ctx.setup.preset) ctx.setup.preset = "shear";
        return holder_study(ctx, out, err);
    }
    if (options.kind == "decay") {
        if (!ctx.setup.preset) ctx.setup.preset = "shear";
        return decay_study(ctx, out, err);
    }
    err << "unknown study kind '" << options.kind << "' (refinement, holder, decay)\n";
    return 3;
}

}  // namespace difflow
