#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "difflow/cli.hpp"
#include "difflow/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"simulator and verification laboratory for torus map flows"};
    app.require_subcommand(1);

    const auto flow_check =
        CLI::IsMember({"paper", "hmhf", "paper_flow", "harmonic_heat_flow"});

    std::string run_config, run_preset, run_flow, run_out;
    std::uint64_t run_seed = 0;
    auto* run_cmd = app.add_subcommand("run", "integrate one configured flow run");
    run_cmd->add_option("--config", run_config, "config file (flat key = value lines)");
    run_cmd->add_option("--preset", run_preset, "initial-map preset name");
    run_cmd->add_option("--flow", run_flow, "flow kind")->check(flow_check);
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "seed recorded in outputs");
    run_cmd->add_option("--out", run_out, "output directory");

    int verify_trials = 1000;
    std::uint64_t verify_seed = 20240814;
    double verify_tol = 0.0;
    auto* verify_cmd = app.add_subcommand("verify", "run the jet identity suites");
    verify_cmd->add_option("--trials", verify_trials, "sampled jets per identity");
    verify_cmd->add_option("--seed", verify_seed, "jet sampler seed");
    auto* verify_tol_opt =
        verify_cmd->add_option("--tol", verify_tol, "tolerance override for every identity");

    std::string study_kind, study_config, study_preset, study_flow, study_out;
    std::uint64_t study_seed = 0;
    auto* study_cmd = app.add_subcommand("study", "batched runs across resolutions");
    study_cmd->add_option("kind", study_kind, "refinement, holder, or decay")->required();
    study_cmd->add_option("--config", study_config, "config file");
    study_cmd->add_option("--preset", study_preset, "initial-map preset name");
    study_cmd->add_option("--flow", study_flow, "flow kind")->check(flow_check);
    auto* study_seed_opt = study_cmd->add_option("--seed", study_seed, "seed");
    study_cmd->add_option("--out", study_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    if (run_cmd->parsed()) {
        difflow::RunOptions options;
        if (!run_config.empty()) options.config_path = run_config;
        if (!run_preset.empty()) options.preset = run_preset;
        if (!run_flow.empty()) options.flow = difflow::parse_flow_kind(run_flow);
        if (run_seed_opt->count() > 0) options.seed = run_seed;
        if (!run_out.empty()) options.out_dir = run_out;
        return difflow::cmd_run(options, std::cout, std::cerr);
    }
    if (verify_cmd->parsed()) {
        difflow::VerifyOptions options;
        options.trials = verify_trials;
        options.seed = verify_seed;
        if (verify_tol_opt->count() > 0) options.tolerance = verify_tol;
        return difflow::cmd_verify(options, std::cout, std::cerr);
    }
    difflow::StudyOptions options;
    options.kind = study_kind;
    if (!study_config.empty()) options.config_path = study_config;
    if (!study_preset.empty()) options.preset = study_preset;
    if (!study_flow.empty()) options.flow = difflow::parse_flow_kind(study_flow);
    if (study_seed_opt->count() > 0) options.seed = study_seed;
    if (!study_out.empty()) options.out_dir = study_out;
    return difflow::cmd_study(options, std::cout, std::cerr);
}
