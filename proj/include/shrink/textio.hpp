#pragma once

// Number formatting for all text outputs.  Shortest round-trip formatting via
// std::to_chars: "0.5" stays "0.5", and every finite double survives a
// write/read cycle bit-identically, which the profile formats promise.

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace shrink {

inline std::string fmt_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad number: '" + std::string(s) + "'");
    return x;
}

} // namespace shrink
