#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wormsim/simulation.hpp"

// Flat `key = value` configuration files with unit-tagged values, e.g.
//
//   rho    = "3000 /km^2"
//   speed  = "2 km/day"
//   radius = "5 m"
//
// Keys under `manifest.` are metadata and ignored on load, so an emitted
// run manifest is itself a valid configuration.
namespace wormsim::cli {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines; `#` starts a comment; values may be quoted.
KeyValues parse_key_values(std::string_view text);

/// Settings for every subcommand. Unused entries are ignored by a command.
struct Settings {
  abm::SimConfig sim;
  bool seed_given = false;
  std::size_t runs = 10;
  std::uint64_t seed_base = 1;
  std::size_t parallel = 1;
  std::vector<double> radii{10.0, 20.0, 40.0};
  std::vector<double> density_factors{0.5, 1.5, 3.0};
  double t_obs = 1.0;
  std::uint64_t min_entries = 100000;
};

/// Applies every key in `values` on top of `settings`. Throws UsageError for
/// unknown keys, missing or mismatched units, and malformed numbers.
void apply(Settings& settings, const KeyValues& values);

/// Canonical, round-trippable text for a simulation config. dt is written
/// resolved, so a default step stays fixed when read back.
std::string to_config_text(const abm::SimConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace wormsim::cli
