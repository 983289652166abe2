#include "difflow/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "difflow/format.hpp"

namespace difflow {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        std::size_t end = pos;
        while (end < text.size() && text[end] != ' ' && text[end] != '\t') ++end;
        if (end > pos) tokens.push_back(text.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

template <typename Int>
Int parse_integer(std::string_view text, int line) {
    Int value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        fail(line, "expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

double parse_number(std::string_view text, int line) {
    try {
        return parse_double(text);
    } catch (const std::invalid_argument&) {
        fail(line, "expected a number, got '" + std::string(text) + "'");
    }
}

Mat2 parse_matrix(const std::vector<std::string_view>& tokens, int line) {
    if (tokens.size() != 4) fail(line, "expected 4 column-major entries");
    return {parse_number(tokens[0], line), parse_number(tokens[1], line),
            parse_number(tokens[2], line), parse_number(tokens[3], line)};
}

}  // namespace

std::optional<FlowKind> parse_flow_kind(std::string_view token) {
    if (token == "paper_flow" || token == "paper") return FlowKind::paper_flow;
    if (token == "harmonic_heat_flow" || token == "hmhf") return FlowKind::harmonic_heat_flow;
    return std::nullopt;
}

const char* flow_kind_name(FlowKind kind) {
    return kind == FlowKind::paper_flow ? "paper_flow" : "harmonic_heat_flow";
}

RunSetup parse_config(std::istream& in) {
    RunSetup setup;
    std::string raw;
    int line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        std::string_view line = raw;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_number, "expected 'key = value'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_number, "empty key");
        if (value.empty()) fail(line_number, "empty value for '" + key + "'");
        const std::vector<std::string_view> tokens = split_tokens(value);

        auto single = [&]() -> std::string_view {
            if (tokens.size() != 1) fail(line_number, "'" + key + "' takes a single value");
            return tokens[0];
        };

        if (key == "preset") {
            setup.preset = std::string(single());
        } else if (key == "n") {
            setup.n1 = setup.n2 = parse_integer<int>(single(), line_number);
        } else if (key == "n1") {
            setup.n1 = parse_integer<int>(single(), line_number);
        } else if (key == "n2") {
            setup.n2 = parse_integer<int>(single(), line_number);
        } else if (key == "domain_basis") {
            setup.domain_basis = parse_matrix(tokens, line_number);
        } else if (key == "target_basis") {
            setup.target_basis = parse_matrix(tokens, line_number);
        } else if (key == "linear_map") {
            if (tokens.size() != 4) fail(line_number, "expected 4 column-major integers");
            setup.linear_map = {
                parse_integer<int>(tokens[0], line_number),
                parse_integer<int>(tokens[1], line_number),
                parse_integer<int>(tokens[2], line_number),
                parse_integer<int>(tokens[3], line_number)};
        } else if (key == "mode") {
            if (tokens.size() != 5) fail(line_number, "mode takes: k1 k2 amp1 amp2 phase");
            ModeSpec mode;
            mode.k1 = parse_integer<int>(tokens[0], line_number);
            mode.k2 = parse_integer<int>(tokens[1], line_number);
            mode.amplitude = {parse_number(tokens[2], line_number),
                              parse_number(tokens[3], line_number)};
            mode.phase = parse_number(tokens[4], line_number);
            setup.modes.push_back(mode);
        } else if (key == "flow_kind") {
            const auto kind = parse_flow_kind(single());
            if (!kind) fail(line_number, "flow_kind must be paper_flow or harmonic_heat_flow");
            setup.flow.kind = *kind;
        } else if (key == "stepper") {
            const std::string_view token = single();
            if (token == "euler") {
                setup.flow.stepper = Stepper::euler;
            } else if (token == "rk2") {
                setup.flow.stepper = Stepper::rk2;
            } else {
                fail(line_number, "stepper must be euler or rk2");
            }
        } else if (key == "cfl_safety") {
            setup.flow.cfl_safety = parse_number(single(), line_number);
        } else if (key == "t_end") {
            setup.flow.t_end = parse_number(single(), line_number);
        } else if (key == "q_tol_rel") {
            setup.flow.q_tol_rel = parse_number(single(), line_number);
        } else if (key == "dt_override") {
            setup.flow.dt_override = parse_number(single(), line_number);
        } else if (key == "diagnostics_stride") {
            setup.flow.diagnostics_stride = parse_integer<int>(single(), line_number);
        } else if (key == "snapshot_stride") {
            setup.flow.snapshot_stride = parse_integer<int>(single(), line_number);
        } else if (key == "seed") {
            setup.seed = parse_integer<std::uint64_t>(single(), line_number);
        } else if (key == "out_dir") {
            setup.out_dir = std::string(value);
        } else if (key == "c_slack") {
            setup.c_slack = parse_number(single(), line_number);
        } else {
            fail(line_number, "unknown key '" + key + "'");
        }
    }
    return setup;
}

RunSetup parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    return parse_config(in);
}

MapField build_initial_map(const RunSetup& setup) {
    if (setup.preset) {
        if (setup.n1 != setup.n2) {
            throw std::runtime_error("config: presets need a square grid (n1 == n2)");
        }
        std::optional<MapField> field = preset_by_name(*setup.preset, setup.n1);
        if (!field) throw std::runtime_error("config: unknown preset '" + *setup.preset + "'");
        return *std::move(field);
    }
    const Lattice domain(setup.domain_basis);
    const Lattice target(setup.target_basis);
    const TorusPair pair = make_torus_pair(domain, target, setup.linear_map);
    return build_map(pair, setup.n1, setup.n2, setup.modes);
}

}  // namespace difflow
