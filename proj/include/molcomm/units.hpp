#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "molcomm/errors.hpp"

namespace molcomm::units {

enum class Quantity
{
    Dimensionless,
    Length,        // m
    Time,          // s
    Diffusivity,   // m^2/s
    Velocity,      // m/s
    Concentration, // per m^2 (free diffusion) or per m (drift)
};

struct Parsed
{
    double value = 0.0;
    //! For concentrations: 2 for per-area, 1 for per-length, 0 if no unit given.
    int inverse_length_power = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

// Metres per unit for a length symbol; 0 if unknown.
inline double length_scale(std::string_view unit)
{
    if (unit == "m")
        return 1.0;
    if (unit == "cm")
        return 1e-2;
    if (unit == "mm")
        return 1e-3;
    if (unit == "um" || unit == "\xC2\xB5m")
        return 1e-6;
    if (unit == "nm")
        return 1e-9;
    return 0.0;
}

inline double time_scale(std::string_view unit)
{
    if (unit == "s")
        return 1.0;
    if (unit == "ms")
        return 1e-3;
    if (unit == "min")
        return 60.0;
    if (unit == "h")
        return 3600.0;
    return 0.0;
}

[[noreturn]] inline void bad_unit(std::string_view text, std::string_view expected)
{
    throw ConfigError("unrecognised unit in '" + std::string(text) + "' (expected " +
                      std::string(expected) + ")");
}

} // namespace detail

/// Parse "<number>[unit]" and convert to SI. Accepted suffixes:
/// length m|cm|mm|um|nm, time s|ms|min|h, diffusivity <length>2/s,
/// velocity <length>/s, concentration [mol]/<length>2 or [mol]/<length>.
inline Parsed parse(std::string_view text, Quantity kind)
{
    const std::string_view trimmed = detail::trim(text);
    double number = 0.0;
    const auto [end, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), number);
    if (ec != std::errc() || !std::isfinite(number))
        throw ConfigError("not a number: '" + std::string(text) + "'");
    std::string_view unit = detail::trim(
        trimmed.substr(static_cast<std::size_t>(end - trimmed.data())));

    Parsed out{number, 0};
    if (unit.empty())
        return out;

    switch (kind)
    {
        case Quantity::Dimensionless:
            detail::bad_unit(text, "a plain number");
        case Quantity::Length: {
            const double scale = detail::length_scale(unit);
            if (scale == 0.0)
                detail::bad_unit(text, "m, cm, mm, um or nm");
            out.value *= scale;
            return out;
        }
        case Quantity::Time: {
            const double scale = detail::time_scale(unit);
            if (scale == 0.0)
                detail::bad_unit(text, "s, ms, min or h");
            out.value *= scale;
            return out;
        }
        case Quantity::Diffusivity: {
            if (unit.size() < 4 || unit.substr(unit.size() - 3) != "2/s")
                detail::bad_unit(text, "m2/s, cm2/s, mm2/s or um2/s");
            const double scale = detail::length_scale(unit.substr(0, unit.size() - 3));
            if (scale == 0.0)
                detail::bad_unit(text, "m2/s, cm2/s, mm2/s or um2/s");
            out.value *= scale * scale;
            return out;
        }
        case Quantity::Velocity: {
            if (unit.size() < 3 || unit.substr(unit.size() - 2) != "/s")
                detail::bad_unit(text, "m/s, mm/s or um/s");
            const double scale = detail::length_scale(unit.substr(0, unit.size() - 2));
            if (scale == 0.0)
                detail::bad_unit(text, "m/s, mm/s or um/s");
            out.value *= scale;
            return out;
        }
        case Quantity::Concentration: {
            if (unit.starts_with("mol"))
                unit.remove_prefix(3);
            if (!unit.starts_with("/"))
                detail::bad_unit(text, "/m2, /mm2, /m or /mm");
            unit.remove_prefix(1);
            int power = 1;
            if (unit.ends_with("2"))
            {
                power = 2;
                unit.remove_suffix(1);
            }
            const double scale = detail::length_scale(unit);
            if (scale == 0.0)
                detail::bad_unit(text, "/m2, /mm2, /m or /mm");
            out.value /= std::pow(scale, power);
            out.inverse_length_power = power;
            return out;
        }
    }
    detail::bad_unit(text, "a known unit");
}

inline double parse_si(std::string_view text, Quantity kind)
{
    return parse(text, kind).value;
}

} // namespace molcomm::units
