#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "qcff/errors.hpp"

namespace qcff {

/// Shortest round-trip decimal form; identical bits give identical text.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Whole-field parse; throws SchemaError on trailing garbage or empty input.
inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw SchemaError("cannot parse '" + std::string(s) + "' as a number");
    }
    return v;
}

} // namespace qcff
