#ifndef TINYFL_TEXT_FORMAT_HPP
#define TINYFL_TEXT_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace tinyfl {

// Shortest decimal that parses back to exactly the same binary64 value,
// with ".0" appended to integral renderings so a float never reads as an
// integer (1.0 -> "1.0"). Non-finite values render as NaN / Infinity /
// -Infinity and are not valid JSON.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x < 0 ? "-Infinity" : "Infinity";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

inline std::string format_uint(uint64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace tinyfl

#endif
