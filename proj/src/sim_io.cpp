#include "wormsim/sim_io.hpp"

#include <ostream>

namespace wormsim::abm {

void write_series_csv(std::ostream& out, const ode::SirSeries& series) {
  ode::write_series_csv(out, series);
}

void write_events_csv(std::ostream& out, std::span<const InfectionEvent> events) {
  const auto old_precision = out.precision(12);
  out << kEventsSchema << '\n';
  for (const InfectionEvent& e : events) {
    out << e.t << ',' << e.source << ',' << e.target << ',' << e.impact << '\n';
  }
  out.precision(old_precision);
}

}  // namespace wormsim::abm
