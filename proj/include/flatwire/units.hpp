#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "flatwire/errors.hpp"

namespace flatwire {

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 4.0e-7 * pi;  // [H/m]

/// Angular frequency for a frequency in Hz.
constexpr double angular(double f_hz) { return 2.0 * pi * f_hz; }

/// Skin depth sqrt(2/(omega mu sigma)) [m]; infinite at omega = 0.
inline double skin_depth(double omega, double sigma, double mu_r = 1.0) {
    if (omega <= 0.0 || sigma <= 0.0) return INFINITY;
    return std::sqrt(2.0 / (omega * mu0 * mu_r * sigma));
}

enum class Dimension { length, area, none };

namespace detail {
inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}
}  // namespace detail

/// Parses "9.0 mm", "201 mm2", "1e-3 m" or a bare number (SI) into SI units.
/// Frequencies accept k/M/G multipliers when `dim` is none ("100k").
inline double parse_quantity(std::string_view text, Dimension dim, const std::string& field = {}) {
    auto s = detail::trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{}) throw ParseError("not a number: '" + std::string(text) + "'", 0, field);
    auto unit = detail::trim(std::string_view(ptr, static_cast<size_t>(s.data() + s.size() - ptr)));
    if (unit.empty()) return value;

    switch (dim) {
        case Dimension::length:
            if (unit == "m") return value;
            if (unit == "cm") return value * 1e-2;
            if (unit == "mm") return value * 1e-3;
            if (unit == "um") return value * 1e-6;
            break;
        case Dimension::area:
            if (unit == "m2") return value;
            if (unit == "cm2") return value * 1e-4;
            if (unit == "mm2") return value * 1e-6;
            break;
        case Dimension::none:
            if (unit == "k") return value * 1e3;
            if (unit == "M") return value * 1e6;
            if (unit == "G") return value * 1e9;
            break;
    }
    throw ParseError("unknown unit suffix '" + std::string(unit) + "'", 0, field);
}

}  // namespace flatwire
