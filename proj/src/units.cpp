#include "wormsim/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <utility>

#include "wormsim/error.hpp"

namespace wormsim::units {
namespace {

struct UnitEntry {
  std::string_view spelling;
  double to_internal;
};

constexpr std::array kLength{
    UnitEntry{"m", 1.0}, UnitEntry{"km", 1000.0}, UnitEntry{"cm", 0.01}};

constexpr std::array kDensity{
    UnitEntry{"/m^2", 1.0},     UnitEntry{"/m2", 1.0},
    UnitEntry{"m^-2", 1.0},     UnitEntry{"/km^2", 1e-6},
    UnitEntry{"/km2", 1e-6},    UnitEntry{"km^-2", 1e-6},
    UnitEntry{"/ha", 1e-4}};

constexpr std::array kSpeed{
    UnitEntry{"m/day", 1.0},        UnitEntry{"m/d", 1.0},
    UnitEntry{"km/day", 1000.0},    UnitEntry{"km/d", 1000.0},
    UnitEntry{"m/s", kSecondsPerDay}, UnitEntry{"m/h", 24.0},
    UnitEntry{"km/h", 24000.0}};

constexpr std::array kRate{
    UnitEntry{"/day", 1.0},  UnitEntry{"/d", 1.0},
    UnitEntry{"/h", 24.0},   UnitEntry{"/hour", 24.0},
    UnitEntry{"/s", kSecondsPerDay}};

constexpr std::array kDuration{
    UnitEntry{"day", 1.0},          UnitEntry{"days", 1.0},
    UnitEntry{"d", 1.0},            UnitEntry{"h", 1.0 / 24.0},
    UnitEntry{"hour", 1.0 / 24.0},  UnitEntry{"hours", 1.0 / 24.0},
    UnitEntry{"min", 1.0 / 1440.0}, UnitEntry{"s", 1.0 / kSecondsPerDay}};

std::string normalize_unit(std::string_view raw) {
  std::string unit;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      unit.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (unit.starts_with("per")) unit = "/" + unit.substr(3);
  if (unit.starts_with("1/")) unit = unit.substr(1);
  return unit;
}

template <std::size_t N>
const UnitEntry* find_unit(const std::array<UnitEntry, N>& table,
                           std::string_view unit) {
  auto it = std::find_if(table.begin(), table.end(),
                         [&](const UnitEntry& e) { return e.spelling == unit; });
  return it == table.end() ? nullptr : &*it;
}

const UnitEntry* lookup(Dimension d, std::string_view unit) {
  switch (d) {
    case Dimension::Length: return find_unit(kLength, unit);
    case Dimension::Density: return find_unit(kDensity, unit);
    case Dimension::Speed: return find_unit(kSpeed, unit);
    case Dimension::Rate: return find_unit(kRate, unit);
    case Dimension::Duration: return find_unit(kDuration, unit);
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::pair<double, std::string_view> split_number(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{}) {
    throw UsageError("expected a number in '" + std::string(text) + "'");
  }
  return {value, text.substr(static_cast<std::size_t>(ptr - text.data()))};
}

double convert(double value, std::string_view raw_unit, Dimension d,
               std::string_view original) {
  const std::string unit = normalize_unit(raw_unit);
  if (unit.empty()) {
    throw UsageError("missing unit in '" + std::string(original) + "': expected a " +
                     std::string(dimension_name(d)) + " such as '" +
                     std::string(canonical_unit(d)) + "'");
  }
  const UnitEntry* entry = lookup(d, unit);
  if (entry == nullptr) {
    throw UsageError("unit '" + std::string(trim(raw_unit)) + "' in '" +
                     std::string(original) + "' is not a " +
                     std::string(dimension_name(d)) + " unit");
  }
  return value * entry->to_internal;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Density: return "number density";
    case Dimension::Speed: return "speed";
    case Dimension::Rate: return "rate";
    case Dimension::Duration: return "duration";
  }
  return "?";
}

std::string_view canonical_unit(Dimension d) {
  switch (d) {
    case Dimension::Length: return "m";
    case Dimension::Density: return "/m^2";
    case Dimension::Speed: return "m/day";
    case Dimension::Rate: return "/day";
    case Dimension::Duration: return "day";
  }
  return "";
}

double parse(std::string_view text, Dimension d) {
  auto [value, rest] = split_number(text);
  return convert(value, rest, d, text);
}

std::vector<double> parse_list(std::string_view text, Dimension d) {
  // The unit follows the last number: "10, 20, 40 m".
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    items.push_back(trim(text.substr(start, comma - start)));
    start = comma + 1;
  }
  if (items.empty() || (items.size() == 1 && items.front().empty())) {
    throw UsageError("empty list");
  }
  auto [last_value, unit] = split_number(items.back());
  std::vector<double> out;
  out.reserve(items.size());
  for (std::size_t k = 0; k + 1 < items.size(); ++k) {
    auto [v, own_unit] = split_number(items[k]);
    out.push_back(convert(v, trim(own_unit).empty() ? unit : own_unit, d, text));
  }
  out.push_back(convert(last_value, unit, d, text));
  return out;
}

std::string format(double value, Dimension d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g %s", value, std::string(canonical_unit(d)).c_str());
  return buf;
}

}  // namespace wormsim::units
