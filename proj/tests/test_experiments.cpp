#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wormsim/error.hpp"
#include "wormsim/experiments.hpp"

using namespace wormsim;
using namespace wormsim::experiments;

namespace {

abm::SimConfig quick(std::size_t n = 1500, double t_end = 3.0) {
  abm::SimConfig c;
  c.n = n;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_CASE("single-run ensemble equals a direct run with the derived seed") {
  EnsembleSpec spec{quick(), 1, 42, 1};
  const auto outputs = run_ensemble(spec);
  REQUIRE(outputs.size() == 1);
  abm::SimConfig c = quick();
  c.seed = rng::derive_seed(42, 0);
  CHECK(outputs[0] == abm::run_simulation(c));
}

TEST_CASE("ensembles are deterministic and independent of parallelism") {
  EnsembleSpec spec{quick(800), 6, 7, 1};
  const auto serial = run_ensemble(spec);
  CHECK(serial == run_ensemble(spec));
  spec.parallelism = 4;
  CHECK(serial == run_ensemble(spec));
  CHECK_FALSE(serial[0] == serial[1]);
}

TEST_CASE("invalid ensemble configuration names the run") {
  abm::SimConfig bad = quick(10);
  bad.radius = 40.0;
  EnsembleSpec spec{bad, 3, 1, 1};
  try {
    run_ensemble(spec);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run 0") != std::string::npos);
  }
  spec.runs = 0;
  CHECK_THROWS_AS(run_ensemble(spec), ConfigError);
}

TEST_CASE("growth rate fit recovers an exponential") {
  ode::SirSeries s;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.01 * k;
    s.push_back(t, {0.0, 2.0 * std::exp(3.0 * t), 0.0});
  }
  const auto g = fit_growth_rate(s, 10.0, 500.0);
  REQUIRE(g);
  CHECK(*g == doctest::Approx(3.0).epsilon(1e-10));
  CHECK_FALSE(fit_growth_rate(s, 10.0, 1e9));  // never passes hi
}

TEST_CASE("proportional fit") {
  const std::vector<double> x{10, 20, 40};
  const std::vector<double> y{15, 30, 60};
  const auto fit = fit_proportional(x, y);
  CHECK(fit.slope == doctest::Approx(1.5));
  CHECK(fit.max_relative_deviation == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> y2{15, 30, 66};
  CHECK(fit_proportional(x, y2).max_relative_deviation > 0.05);
}

TEST_CASE("no transmission: no outbreak, no peak error") {
  abm::SimConfig c = quick(1000, 2.0);
  c.p = 0.0;
  const auto m = compare_sim_ode({c, 3, 1, 1});
  // one index case recovering at random vs. exp(-t) decay: at most 1/N apart
  CHECK(m.linf_norm <= 1.0 / 1000.0);
  CHECK(m.peak_time_err == 0.0);
  CHECK(m.peak_height_err == 0.0);
  CHECK(m.outbreak_runs == 0);
  CHECK_FALSE(m.growth_rate_sim);
}

TEST_CASE("comparison metrics are deterministic and finite") {
  const EnsembleSpec spec{quick(2000, 4.0), 3, 5, 1};
  const auto a = compare_sim_ode(spec);
  const auto b = compare_sim_ode(spec);
  CHECK(a.linf_norm == b.linf_norm);
  CHECK(a.peak_sim.t == b.peak_sim.t);
  for (double x : {a.linf_norm, a.peak_time_err, a.peak_height_err}) {
    CHECK(std::isfinite(x));
    CHECK(x >= 0.0);
  }
  CHECK(a.beta == doctest::Approx(model_beta(spec.base)));
  CHECK(a.sim_mean.size() == a.ode_curve.size());
}

TEST_CASE("model beta follows the profile") {
  abm::SimConfig c = quick();
  CHECK(model_beta(c) == doctest::Approx(7.639437268410976));
  c.profile = abm::Profile::Chord;
  CHECK(model_beta(c) == doctest::Approx(6.0));
}

TEST_CASE("radius sweep rows, singleton and skipped radii") {
  const abm::SimConfig base = quick(1000, 2.0);
  const std::vector<double> radii{5.0, 400.0};
  const auto rows = r_sweep(base, radii, 2, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].metrics);
  CHECK_FALSE(rows[1].metrics);
  CHECK(rows[1].diagnostic.find("minimum-image") != std::string::npos);

  const std::vector<double> one{5.0};
  const auto single = r_sweep(base, one, 2, 3);
  const auto direct = compare_sim_ode({base, 2, 3, 1});
  REQUIRE(single[0].metrics);
  CHECK(single[0].metrics->linf_norm == direct.linf_norm);
  CHECK(single[0].metrics->peak_sim.t == direct.peak_sim.t);
}

TEST_CASE("threshold scan without transmission") {
  abm::SimConfig c = quick(500, 1.0);
  c.p = 0.0;
  const std::vector<double> factors{0.5, 2.0};
  const auto rows = threshold_scan(c, factors, 3);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(r.outbreak_probability == 0.0);
  CHECK(rows[1].rho == doctest::Approx(2.0 * c.rho));
}

TEST_CASE("threshold scan sets the density from the critical density") {
  abm::SimConfig c = quick(500, 1.0);
  c.profile = abm::Profile::Chord;
  const std::vector<double> factors{2.0};
  const auto rows = threshold_scan(c, factors, 2);
  CHECK(rows[0].rho == doctest::Approx(2.0 * 5e-4));
  CHECK(rows[0].r0 == doctest::Approx(2.0));
  CHECK(rows[0].analytic_fraction == doctest::Approx(0.7968).epsilon(1e-3));
}

TEST_CASE("profile ratio is one when the chord profile is forced constant") {
  abm::SimConfig c = quick(4000, 2.0);
  const double p = c.p;
  const auto r = profile_ratio_experiment(c, 4, 1, 1, [p](double) { return p; });
  REQUIRE(r.ratio);
  CHECK(std::abs(*r.ratio - 1.0) <= 0.03);
}

TEST_CASE("chord acceptance estimator") {
  const auto a = chord_acceptance_estimate(quick(2000), 20000);
  CHECK(a.entries >= 20000);
  CHECK(a.ratio == doctest::Approx(std::numbers::pi / 4.0).epsilon(0.02));
}
