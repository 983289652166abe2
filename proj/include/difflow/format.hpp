#pragma once

#include <string>

namespace difflow {

// Shortest round-trip decimal form of a double (std::to_chars), so that text
// outputs are locale-independent, byte-stable, and parse back bit-exactly.
void append_double(std::string& out, double value);
std::string format_double(double value);

// Parses a double written by format_double (or any from_chars-compatible
// text). Throws std::invalid_argument on malformed input.
double parse_double(std::string_view text);

}  // namespace difflow
