#include "difflow/format.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace difflow {

void append_double(std::string& out, double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, result.ptr);
}

std::string format_double(double value) {
    std::string out;
    append_double(out, value);
    return out;
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace difflow
