#pragma once

#include <iosfwd>
#include <span>

#include "wormsim/simulation.hpp"

namespace wormsim::abm {

inline constexpr const char* kSeriesSchema = "t,s,i,p";
inline constexpr const char* kEventsSchema = "t,source,target,impact_m";
/// Bumped whenever a CSV column layout changes; recorded in manifests.
inline constexpr int kCsvSchemaVersion = 1;

void write_series_csv(std::ostream& out, const ode::SirSeries& series);
void write_events_csv(std::ostream& out, std::span<const InfectionEvent> events);

}  // namespace wormsim::abm
