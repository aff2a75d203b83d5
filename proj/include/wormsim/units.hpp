#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unit-tagged quantity parsing. Everything is converted to meters and days.
namespace wormsim::units {

enum class Dimension { Length, Density, Speed, Rate, Duration };

std::string_view dimension_name(Dimension d);

/// Parses "<number> <unit>" (whitespace optional, e.g. "3000/km^2",
/// "2 km/day", "5 m"). Throws UsageError when the unit is missing or belongs
/// to another dimension.
double parse(std::string_view text, Dimension d);

/// Comma-separated list sharing one trailing unit: "10,20,40 m".
std::vector<double> parse_list(std::string_view text, Dimension d);

/// Canonical internal unit spelling used when writing values back out.
std::string_view canonical_unit(Dimension d);

/// Round-trippable "<value> <canonical unit>".
std::string format(double value, Dimension d);

inline constexpr double kSecondsPerDay = 86400.0;

}  // namespace wormsim::units
