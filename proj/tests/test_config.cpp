#include <doctest.h>

#include "wormsim/config.hpp"
#include "wormsim/error.hpp"
#include "wormsim/units.hpp"

using namespace wormsim;
using units::Dimension;

TEST_CASE("unit parsing converts to meters and days") {
  CHECK(units::parse("3000/km^2", Dimension::Density) == doctest::Approx(3e-3).epsilon(1e-15));
  CHECK(units::parse("3000 per km^2", Dimension::Density) == doctest::Approx(3e-3).epsilon(1e-15));
  CHECK(units::parse("0.003 /m^2", Dimension::Density) == 0.003);
  CHECK(units::parse("30 /ha", Dimension::Density) == doctest::Approx(3e-3));
  CHECK(units::parse("2 km/day", Dimension::Speed) == 2000.0);
  CHECK(units::parse("1 m/s", Dimension::Speed) == doctest::Approx(86400.0));
  CHECK(units::parse("5 m", Dimension::Length) == 5.0);
  CHECK(units::parse("0.005km", Dimension::Length) == doctest::Approx(5.0));
  CHECK(units::parse("1/day", Dimension::Rate) == 1.0);
  CHECK(units::parse("1 /h", Dimension::Rate) == doctest::Approx(24.0));
  CHECK(units::parse("12 h", Dimension::Duration) == doctest::Approx(0.5));
  CHECK(units::parse("3 days", Dimension::Duration) == 3.0);
}

TEST_CASE("missing or mismatched units are rejected") {
  CHECK_THROWS_AS(units::parse("3000", Dimension::Density), UsageError);
  CHECK_THROWS_AS(units::parse("5 km/day", Dimension::Length), UsageError);
  CHECK_THROWS_AS(units::parse("abc m", Dimension::Length), UsageError);
  CHECK_THROWS_AS(units::parse("5 parsecs", Dimension::Length), UsageError);
  try {
    units::parse("3000", Dimension::Density);
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("/m^2") != std::string::npos);
  }
}

TEST_CASE("lists and round trips") {
  const auto radii = units::parse_list("10, 20,40 m", Dimension::Length);
  REQUIRE(radii.size() == 3);
  CHECK(radii[2] == 40.0);
  CHECK(units::parse_list("0.01,0.02 km", Dimension::Length)[1] == doctest::Approx(20.0));
  CHECK_THROWS_AS(units::parse_list("", Dimension::Length), UsageError);
  for (double v : {3e-3, 0.1 + 0.2, 1.0 / 3.0}) {
    CHECK(units::parse(units::format(v, Dimension::Density), Dimension::Density) == v);
  }
}

TEST_CASE("key-value files") {
  const auto kv = cli::parse_key_values(
      "# comment\n"
      "rho = \"3000 /km^2\"   # trailing\n"
      "\n"
      "radius=5 m\n"
      "label = \"a # not a comment\"\n");
  CHECK(kv.at("rho") == "3000 /km^2");
  CHECK(kv.at("radius") == "5 m");
  CHECK(kv.at("label") == "a # not a comment");
  CHECK_THROWS_AS(cli::parse_key_values("a = 1\na = 2\n"), UsageError);
  CHECK_THROWS_AS(cli::parse_key_values("just text\n"), UsageError);
}

TEST_CASE("settings from key-values") {
  cli::Settings s;
  cli::apply(s, cli::parse_key_values("rho = 3000/km^2\nspeed = 2 km/day\nspeed_model = mb\n"
                                      "radius = 10 m\np = 0.2\ndelta = 2/day\nprofile = chord\n"
                                      "t_end = 6 day\nseed = 17\nruns = 4\nradii = 5,10 m\n"
                                      "manifest.version = \"x\"\n"));
  CHECK(s.sim.rho == doctest::Approx(3e-3));
  CHECK(std::get<kinetics::MaxwellBoltzmann2D>(s.sim.speed).mean == 2000.0);
  CHECK(s.sim.radius == 10.0);
  CHECK(s.sim.p == 0.2);
  CHECK(s.sim.delta == 2.0);
  CHECK(s.sim.profile == abm::Profile::Chord);
  CHECK(s.sim.t_end == 6.0);
  CHECK(s.sim.seed == 17);
  CHECK(s.seed_given);
  CHECK(s.runs == 4);
  CHECK(s.radii == std::vector<double>{5.0, 10.0});

  cli::Settings t;
  CHECK_THROWS_AS(cli::apply(t, {{"colour", "red"}}), UsageError);
  CHECK_THROWS_AS(cli::apply(t, {{"rho", "3000"}}), UsageError);
  CHECK_THROWS_AS(cli::apply(t, {{"profile", "triangle"}}), UsageError);
  CHECK_THROWS_AS(cli::apply(t, {{"n", "-3"}}), UsageError);
}

TEST_CASE("config text round-trips exactly") {
  abm::SimConfig c;
  c.rho = 1.0 / 3.0 * 1e-2;
  c.speed = kinetics::MaxwellBoltzmann2D{1234.5678};
  c.profile = abm::Profile::Chord;
  c.seed = 18446744073709551557ULL;
  c.initial_infected = 3;
  c.sample_every = 4;
  cli::Settings s;
  cli::apply(s, cli::parse_key_values(cli::to_config_text(c)));
  abm::SimConfig expected = c;
  expected.dt = c.default_dt();
  CHECK(s.sim == expected);
}

TEST_CASE("hashing") {
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(cli::hex64(0xabcULL) == "0000000000000abc");
}
