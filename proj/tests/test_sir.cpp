#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "wormsim/error.hpp"
#include "wormsim/sir.hpp"

using namespace wormsim;
using namespace wormsim::ode;

TEST_CASE("final size at R0 = 2") {
  const double z = final_size({2.0, 1.0, 1.0});
  CHECK(std::abs(z - 0.7968) <= 1e-4);
  CHECK(std::abs(z - oracle::final_fraction_fixed_point(2.0)) <= 1e-12);
}

TEST_CASE("final size matches bisection oracle") {
  for (double r0 : {1.01, 1.05, 1.5, 2.0, 3.0, 4.0, 6.0, 7.639437268410976, 10.0, 50.0}) {
    CAPTURE(r0);
    const double n = 10000.0;
    const double p_inf = final_size({r0, 1.0, n});
    CHECK(std::abs(p_inf / n - oracle::final_fraction_bisect(r0)) <= 1e-10);
    // Root of the defining equation.
    CHECK(std::abs(p_inf - n * (1.0 - std::exp(-r0 * p_inf / n))) <= 1e-8 * n);
  }
}

TEST_CASE("final size is zero at or below threshold") {
  CHECK(final_size({1.0, 1.0, 100.0}) == 0.0);
  CHECK(final_size({0.5, 1.0, 100.0}) == 0.0);
  CHECK(final_size({0.0, 1.0, 100.0}) == 0.0);
}

TEST_CASE("final size increases with R0") {
  double prev = 0.0;
  for (double r0 = 1.1; r0 < 20.0; r0 += 0.3) {
    const double z = final_size({r0, 1.0, 1.0});
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("integration conserves the population") {
  for (double beta : {0.0, 0.5, 2.0, 7.639437268410976, 60.0}) {
    const SirParams params{beta, 1.0, 10000.0};
    const auto series = integrate_sir(params, {9999.0, 1.0, 0.0}, 20.0, default_step(params));
    for (const auto& s : series.states) CHECK(std::abs(s.total() - 10000.0) <= 1e-9 * 10000.0);
  }
}

TEST_CASE("pure decay without transmission") {
  const SirParams params{0.0, 1.3, 100.0};
  const auto series = integrate_sir(params, {0.0, 100.0, 0.0}, 5.0, 0.01);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double exact = 100.0 * std::exp(-1.3 * series.times[k]);
    CHECK(std::abs(series.states[k].i - exact) <= 1e-8 * 100.0);
  }
}

TEST_CASE("fourth-order convergence") {
  const SirParams params{4.0, 1.0, 1000.0};
  const SirState init{999.0, 1.0, 0.0};
  const auto reference = integrate_sir(params, init, 4.0, 1e-4).states.back().i;
  const double e1 = std::abs(integrate_sir(params, init, 4.0, 0.04).states.back().i - reference);
  const double e2 = std::abs(integrate_sir(params, init, 4.0, 0.02).states.back().i - reference);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("long-time patched count approaches final size") {
  const double n = 10000.0;
  for (double r0 : {1.5, 2.0, 4.0, 6.0}) {
    CAPTURE(r0);
    const SirParams params{r0, 1.0, n};
    const auto series = integrate_sir(params, {n - 1.0, 1.0, 0.0}, 400.0, default_step(params));
    CHECK(std::abs(series.states.back().p - final_size(params)) <= 1e-3 * n);
  }
}

TEST_CASE("sample times and last step") {
  const SirParams params{2.0, 1.0, 10.0};
  const auto series = integrate_sir(params, {9.0, 1.0, 0.0}, 1.05, 0.1);
  REQUIRE(series.size() == 12);
  CHECK(series.times.front() == 0.0);
  CHECK(series.times[5] == doctest::Approx(0.5));
  CHECK(series.times.back() == 1.05);
  CHECK_THROWS(integrate_sir(params, {9.0, 1.0, 0.0}, 1.0, 0.0));
  CHECK_THROWS(integrate_sir(params, {9.0, 1.0, 0.0}, -1.0, 0.1));
}

TEST_CASE("threshold condition") {
  CHECK(epidemic_threshold({3e-3, 5.0, 2000.0, 0.1, 1.0}));
  CHECK_FALSE(epidemic_threshold({3e-3, 5.0, 2000.0, 0.0, 1.0}));
  CHECK_FALSE(epidemic_threshold({5e-4, 5.0, 2000.0, 0.1, 1.0}));  // exactly critical
  CHECK(epidemic_threshold({5.1e-4, 5.0, 2000.0, 0.1, 1.0}));
}

TEST_CASE("peak picks the earliest maximum") {
  SirSeries s;
  s.push_back(0.0, {9, 1, 0});
  s.push_back(1.0, {7, 3, 0});
  s.push_back(2.0, {5, 3, 2});
  s.push_back(3.0, {5, 1, 4});
  const Peak peak = peak_infectives(s);
  CHECK(peak.t == 1.0);
  CHECK(peak.i == 3.0);
}

TEST_CASE("default step") {
  CHECK(default_step({7.5, 1.0, 1.0}) == doctest::Approx(0.01 / 7.5));
  CHECK(default_step({0.0, 0.0, 1.0}) == 0.01);
}

TEST_CASE("series csv") {
  SirSeries s;
  s.push_back(0.0, {9, 1, 0});
  s.push_back(0.5, {8, 2, 0});
  std::ostringstream os;
  write_series_csv(os, s);
  CHECK(os.str() == "t,s,i,p\n0,9,1,0\n0.5,8,2,0\n");
}
