#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "difflow/flow.hpp"

namespace difflow {

// Exit codes shared by all subcommands: 0 success, 1 verification failure,
// 2 degeneracy under paper_flow, 3 invalid config or initial data.

struct RunOptions {
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<FlowKind> flow;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

// Integrates one configured run; writes diagnostics.csv, snapshot dumps,
// final.field, and summary.txt into the output directory and prints the same
// summary to `out`.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
    int trials = 1000;
    std::uint64_t seed = 20240814;
    std::optional<double> tolerance;  // replaces every suite's threshold
};

// Runs the jet identity suites and prints one line per identity
// (name, trials, max residual, tolerance, PASS/FAIL).
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

struct StudyOptions {
    std::string kind;  // refinement, holder, or decay
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<FlowKind> flow;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

// Batched runs across n in {32, 64, 128}: refinement measures convergence
// orders of the energy identity and the (r, theta) residuals, holder measures
// parabolic oscillation seminorms, decay fits the exponential rate of q.
int cmd_study(const StudyOptions& options, std::ostream& out, std::ostream& err);

}  // namespace difflow
