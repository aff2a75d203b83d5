#pragma once

#include <cstdint>
#include <vector>

#include "wormsim/simulation.hpp"

// Contact statistics measured on a population with transmission switched off.
namespace wormsim::abm {

struct ContactStats {
  double mean_rate = 0.0;    ///< entries per agent per day
  double sd = 0.0;           ///< across-agent standard deviation of the rate
  double ci_half_width = 0.0;  ///< 95% normal half-width of the mean
  double observed_days = 0.0;
  std::size_t agents = 0;
  std::uint64_t entries = 0;  ///< pair entries (each counts for both members)
};

/// Counts radius-R entries per agent over t_obs days with p forced to 0.
ContactStats measure_contact_rate(const SimConfig& config, double t_obs);

/// Equal-width histogram of impact parameters on [0, R].
class ImpactHistogram {
 public:
  explicit ImpactHistogram(double radius, std::size_t bins = 10);

  void add(double impact);

  double radius() const { return radius_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

  /// Pearson statistic against equal expected counts per bin.
  double chi_square_uniform() const;
  /// Upper-tail probability of that statistic, bins - 1 degrees of freedom.
  double uniform_p_value() const;

 private:
  double radius_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

ImpactHistogram impact_histogram(const SimConfig& config, double t_obs, std::size_t bins = 10);

/// Histogram of the entries seen while stepping an existing population.
ImpactHistogram impact_histogram(const SimConfig& config, std::vector<Agent> population,
                                 double t_obs, std::size_t bins = 10);

}  // namespace wormsim::abm
