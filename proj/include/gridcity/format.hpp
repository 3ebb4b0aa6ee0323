#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace gridcity {

/// Fixed-point decimal, dp digits, "-0.000" normalized to "0.000".
/// Artifact files use this so byte comparison is meaningful.
inline std::string fmt_fixed(double value, int dp) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", dp, value);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

/// Fixed-point then trailing zeros (and a bare dot) stripped: 45.00 -> "45",
/// 137.50 -> "137.5". Matches the surface forms of generated text.
inline std::string fmt_trim(double value, int dp) {
    std::string s = fmt_fixed(value, dp);
    if (s.find('.') != std::string::npos) {
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

inline bool is_integral_value(double v) { return std::isfinite(v) && v == std::floor(v); }

/// Round half away from zero to the given number of decimals.
inline double round_decimals(double v, int dp) {
    double scale = std::pow(10.0, dp);
    return std::round(v * scale) / scale;
}

/// Round half up to the nearest integer (values here are non-negative).
inline int64_t round_half_up(double v) { return static_cast<int64_t>(std::floor(v + 0.5)); }

inline void json_escape_to(std::string& out, std::string_view s) {
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
}

inline std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    json_escape_to(out, s);
    return out;
}

}  // namespace gridcity
