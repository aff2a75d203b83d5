#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wormsim_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(WORMSIM_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path find_one(const fs::path& dir, const std::string& suffix) {
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return e.path();
    }
  }
  return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("analytic report in km and m units") {
  const auto dir = scratch("analytic");
  const auto km = run("analytic --rho 3000/km^2 --speed \"2 km/day\" --radius \"5 m\" --p 0.1 --delta 1/day", dir);
  REQUIRE(km.code == 0);
  CHECK(contains(km.out, "76.3944 /day"));
  CHECK(contains(km.out, "beta_chord                   6 /day"));
  CHECK(contains(km.out, "(500 /km^2)"));
  CHECK(contains(km.out, "epidemic possible"));
  CHECK(contains(km.out, "0.997484"));

  const auto m =
      run("analytic --rho \"0.003 /m^2\" --speed \"2000 m/day\" --radius \"0.005 km\" --set p=0.1 --delta \"1 /day\"",
          dir);
  REQUIRE(m.code == 0);
  CHECK(m.out == km.out);
}

TEST_CASE("analytic without transmission") {
  const auto dir = scratch("analytic_p0");
  const auto r = run("analytic --p 0 --csv " + (dir / "a.csv").string(), dir);
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "no epidemic"));
  CHECK(contains(r.out, "final size P_inf / N         0\n"));
  CHECK(contains(slurp(dir / "a.csv"), "final_fraction,0,"));
}

TEST_CASE("analytic rejects missing units") {
  const auto dir = scratch("analytic_units");
  const auto r = run("analytic --rho 3000", dir);
  CHECK(r.code == 1);
  CHECK(contains(r.err, "missing unit"));
}

TEST_CASE("simulate writes outputs and reruns byte-identically from its manifest") {
  const auto dir = scratch("simulate");
  const auto first = run("simulate --n 1500 --t-end \"2 day\" --out " + (dir / "a").string(), dir);
  REQUIRE(first.code == 0);
  CHECK(contains(first.err, "no seed given"));
  const auto manifest = find_one(dir / "a", "_manifest.txt");
  REQUIRE(!manifest.empty());
  const std::string text = slurp(manifest);
  CHECK(contains(text, "manifest.version"));
  CHECK(contains(text, "manifest.timestamp"));
  CHECK(contains(text, "manifest.input_hash"));
  CHECK(contains(text, "seed = "));

  const auto second = run("simulate --config " + manifest.string() + " --out " + (dir / "b").string(), dir);
  REQUIRE(second.code == 0);
  CHECK_FALSE(contains(second.err, "no seed given"));
  for (const char* suffix : {"_series.csv", "_events.csv"}) {
    const auto a = find_one(dir / "a", suffix);
    const auto b = find_one(dir / "b", suffix);
    REQUIRE(!a.empty());
    REQUIRE(!b.empty());
    CHECK(a.filename() == b.filename());
    CHECK(slurp(a) == slurp(b));
  }
  CHECK(slurp(find_one(dir / "a", "_series.csv")).rfind("t,s,i,p\n", 0) == 0);
  CHECK(slurp(find_one(dir / "a", "_events.csv")).rfind("t,source,target,impact_m\n", 0) == 0);
}

TEST_CASE("simulate reports every violation") {
  const auto dir = scratch("simulate_bad");
  const auto geo = run("simulate --seed 1 --n 10 --radius \"40 m\"", dir);
  CHECK(geo.code == 1);
  CHECK(contains(geo.err, "L = sqrt(n / rho) = 57.735"));
  CHECK(contains(geo.err, "minimum-image"));

  const auto many = run("simulate --seed 1 --p 1.5 --initial-infected 0", dir);
  CHECK(many.code == 1);
  CHECK(contains(many.err, "p must lie"));
  CHECK(contains(many.err, "initial_infected"));
}

TEST_CASE("experiment names and arguments") {
  const auto dir = scratch("experiment_bad");
  const auto unknown = run("experiment sweep", dir);
  CHECK(unknown.code == 1);
  CHECK(contains(unknown.err, "compare rsweep threshold profile-ratio contact-rate"));
  const auto empty = run("experiment rsweep --radii \"\"", dir);
  CHECK(empty.code == 1);
  const auto usage = run("simulate --no-such-flag", dir);
  CHECK(usage.code == 1);
}

TEST_CASE("rsweep writes one row per radius plus summary and manifest") {
  const auto dir = scratch("rsweep");
  const auto r = run("experiment rsweep --n 600 --runs 2 --t-end \"1 day\" --radii \"10,20,40 m\" --out " +
                         (dir / "o").string(),
                     dir);
  REQUIRE(r.code == 0);
  const auto table = find_one(dir / "o", ".csv");
  REQUIRE(!table.empty());
  CHECK(table.filename().string().rfind("rsweep_", 0) == 0);
  std::istringstream lines(slurp(table));
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
  const auto summary = nlohmann::json::parse(slurp(find_one(dir / "o", "_summary.json")));
  CHECK(summary["rows"].size() == 3);
  CHECK(!find_one(dir / "o", "_manifest.txt").empty());
}

TEST_CASE("contact-rate experiment summary") {
  const auto dir = scratch("contact");
  const auto r = run("experiment contact-rate --n 2000 --t-obs \"0.5 day\" --seed 3 --out " + (dir / "o").string(), dir);
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(slurp(find_one(dir / "o", "_summary.json")));
  CHECK(summary["expected_per_day"].get<double>() == doctest::Approx(76.3944).epsilon(1e-5));
  const double measured = summary["mean_rate_per_day"].get<double>();
  CHECK(std::abs(measured - 76.3944) < 0.05 * 76.3944);
  CHECK(!find_one(dir / "o", "_impacts.csv").empty());
}
