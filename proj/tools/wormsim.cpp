#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wormsim/config.hpp"
#include "wormsim/error.hpp"
#include "wormsim/experiments.hpp"
#include "wormsim/kinetics.hpp"
#include "wormsim/measurement.hpp"
#include "wormsim/sim_io.hpp"
#include "wormsim/sir.hpp"
#include "wormsim/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wormsim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

const std::vector<std::string> kExperimentNames{"compare", "rsweep", "threshold", "profile-ratio",
                                                "contact-rate"};

struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> parallel;
  std::vector<std::pair<std::string, std::string>> values;  // in flag order
  std::vector<std::string> sets;
};

struct Loaded {
  cli::Settings settings;
  std::string input_hash = "none";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Loaded load(const Overrides& o) {
  Loaded out;
  if (!o.config_path.empty()) {
    const std::string text = read_file(o.config_path);
    out.input_hash = cli::hex64(cli::fnv1a64(text));
    cli::apply(out.settings, cli::parse_key_values(text));
  }
  cli::KeyValues flags;
  for (const auto& [key, value] : o.values) flags[key] = value;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    auto one = cli::parse_key_values(s);
    for (auto& [k, v] : one) flags[k] = v;
  }
  cli::apply(out.settings, flags);
  if (o.runs) out.settings.runs = *o.runs;
  if (o.parallel) out.settings.parallel = *o.parallel;
  return out;
}

void add_common(CLI::App* app, Overrides& o, bool experiment) {
  app->add_option("--config", o.config_path, "key = value configuration file");
  app->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app->add_option("--seed", o.seed,
                  experiment ? "seed base for the ensemble" : "RNG seed (generated when absent)");
  if (experiment) {
    app->add_option("--runs", o.runs, "runs per ensemble");
    app->add_option("--parallel", o.parallel, "concurrent runs");
  }
  app->add_option("--set", o.sets, "extra key=value setting (repeatable)");

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag kFlags[] = {
      {"--n", "n", "number of devices"},
      {"--rho", "rho", "device density, e.g. \"3000/km^2\""},
      {"--radius", "radius", "transmission radius, e.g. \"5 m\""},
      {"--speed", "speed", "mean speed, e.g. \"2 km/day\""},
      {"--speed-model", "speed_model", "constant | maxwell-boltzmann"},
      {"--p", "p", "transmission probability per contact"},
      {"--delta", "delta", "patch rate, e.g. \"1/day\""},
      {"--profile", "profile", "uniform | chord"},
      {"--dt", "dt", "time step, e.g. \"0.0003125 day\" or auto"},
      {"--t-end", "t_end", "simulated time, e.g. \"12 day\""},
      {"--initial-infected", "initial_infected", "index cases"},
      {"--sample-every", "sample_every", "steps between series samples"},
  };
  static const Flag kExperimentFlags[] = {
      {"--radii", "radii", "radius sweep, e.g. \"10,20,40 m\""},
      {"--density-factors", "density_factors", "multiples of the critical density"},
      {"--t-obs", "t_obs", "observation time for contact-rate"},
      {"--min-entries", "min_entries", "entries for the acceptance estimator"},
  };
  auto bind = [&](const Flag& f) {
    app->add_option_function<std::string>(
        f.name, [&o, key = std::string(f.key)](const std::string& v) { o.values.emplace_back(key, v); },
        f.help);
  };
  for (const auto& f : kFlags) bind(f);
  if (experiment) {
    for (const auto& f : kExperimentFlags) bind(f);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list_text(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? "," : "") + num(xs[k]);
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void write_manifest(const fs::path& path, const std::string& command, const std::string& input_hash,
                    const std::string& body, const std::vector<std::string>& files,
                    const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto out = open_out(path);
  out << "# Run manifest. Usable as --config to reproduce the outputs listed below.\n"
      << "manifest.version = \"" << WORMSIM_VERSION << "\"\n"
      << "manifest.timestamp = \"" << utc_timestamp() << "\"\n"
      << "manifest.command = \"" << command << "\"\n"
      << "manifest.input_hash = \"" << input_hash << "\"\n"
      << "manifest.csv_schema = " << abm::kCsvSchemaVersion << '\n';
  for (const auto& [k, v] : extra) out << "manifest." << k << " = \"" << v << "\"\n";
  for (std::size_t k = 0; k < files.size(); ++k) {
    out << "manifest.output_" << k << " = \"" << files[k] << "\"\n";
  }
  out << body;
}

void print_warnings(const abm::SimConfig& config) {
  for (const auto& w : config.warnings()) std::cerr << "warning: " << w << '\n';
}

// analytic -----------------------------------------------------------------

int cmd_analytic(const Overrides& o, const std::string& csv_path) {
  const Loaded loaded = load(o);
  const abm::SimConfig& c = loaded.settings.sim;
  const kinetics::KineticParams params = c.kinetic_params();
  params.validate();

  const double cr = kinetics::contact_rate_population(c.speed, params);
  const double b_basic = kinetics::beta_basic(params);
  const double b_chord = kinetics::beta_chord(params);
  const bool epidemic = ode::epidemic_threshold(params);
  const double r0 = params.delta > 0.0 ? b_chord / params.delta : (b_chord > 0.0 ? INFINITY : 0.0);
  double fraction = 0.0;
  if (epidemic) {
    fraction = params.delta > 0.0 ? ode::final_size({b_chord, params.delta, 1.0}) : 1.0;
  }
  const double n = static_cast<double>(c.n);
  std::optional<double> rho_c;
  if (b_chord > 0.0) rho_c = kinetics::critical_density(params.radius, params.mean_speed, params.p, params.delta);

  auto line = [](const char* label, const std::string& value) {
    std::printf("%-28s %s\n", label, value.c_str());
  };
  auto g = [](double x, const char* unit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return *unit ? std::string(buf) + " " + unit : std::string(buf);
  };
  line("contact rate CR", g(cr, "/day"));
  line("beta_basic", g(b_basic, "/day"));
  line("beta_chord", g(b_chord, "/day"));
  line("critical density rho_c",
       rho_c ? g(*rho_c, "/m^2") + " (" + g(*rho_c * 1e6, "/km^2") + ")" : std::string("undefined (p v R = 0)"));
  line("R0 = beta_chord / delta", std::isinf(r0) ? std::string("inf") : g(r0, ""));
  line("threshold", epidemic ? "epidemic possible" : "no epidemic");
  line("final size P_inf / N", g(fraction, ""));
  line("final size P_inf", g(fraction * n, "devices") + " (N = " + std::to_string(c.n) + ")");

  if (!csv_path.empty()) {
    auto out = open_out(csv_path);
    out << "quantity,value,unit\n"
        << "contact_rate," << num(cr) << ",/day\n"
        << "beta_basic," << num(b_basic) << ",/day\n"
        << "beta_chord," << num(b_chord) << ",/day\n"
        << "critical_density," << (rho_c ? num(*rho_c) : std::string("nan")) << ",/m^2\n"
        << "r0," << num(r0) << ",\n"
        << "epidemic," << (epidemic ? 1 : 0) << ",\n"
        << "final_fraction," << num(fraction) << ",\n"
        << "final_size," << num(fraction * n) << ",devices\n";
  }
  return 0;
}

// simulate -----------------------------------------------------------------

int cmd_simulate(const Overrides& o) {
  Loaded loaded = load(o);
  abm::SimConfig& c = loaded.settings.sim;
  if (o.seed) {
    c.seed = *o.seed;
  } else if (!loaded.settings.seed_given) {
    std::random_device rd;
    c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "warning: no seed given; using generated seed " << c.seed
              << " (recorded in the manifest)\n";
  }
  c.validate();
  if (c.dt == 0.0) c.dt = c.default_dt();
  print_warnings(c);

  const std::string body = cli::to_config_text(c);
  const std::string stem = "simulate_" + cli::hex64(cli::fnv1a64(body)) + "_" + std::to_string(c.seed);
  ensure_dir(o.out_dir);
  const fs::path dir(o.out_dir);

  const abm::SimOutput output = abm::run_simulation(c);
  const std::string series_name = stem + "_series.csv";
  const std::string events_name = stem + "_events.csv";
  {
    auto out = open_out(dir / series_name);
    abm::write_series_csv(out, output.series);
  }
  {
    auto out = open_out(dir / events_name);
    abm::write_events_csv(out, output.infections);
  }
  write_manifest(dir / (stem + "_manifest.txt"), "simulate", loaded.input_hash, body,
                 {series_name, events_name});

  const auto& last = output.series.states.back();
  std::printf("wrote %s\n", (dir / series_name).string().c_str());
  std::printf("final S = %.0f  I = %.0f  P = %.0f  infections = %zu  entries = %llu\n", last.s, last.i,
              last.p, output.infections.size(), static_cast<unsigned long long>(output.contact_entries));
  return 0;
}

// experiment ---------------------------------------------------------------

json metrics_json(const experiments::ComparisonMetrics& m) {
  json j;
  j["linf_norm"] = m.linf_norm;
  j["peak_time_err"] = m.peak_time_err;
  j["peak_height_err"] = m.peak_height_err;
  j["peak_sim"] = {{"t_day", m.peak_sim.t}, {"i", m.peak_sim.i}};
  j["peak_ode"] = {{"t_day", m.peak_ode.t}, {"i", m.peak_ode.i}};
  j["final_size_sim_mean"] = m.final_size_sim_mean;
  j["final_size_sim_sd"] = m.final_size_sim_sd;
  j["final_size_analytic"] = m.final_size_analytic;
  j["growth_rate_sim_per_day"] = m.growth_rate_sim ? json(*m.growth_rate_sim) : json(nullptr);
  j["growth_rate_model_per_day"] = m.growth_rate_model;
  j["beta_per_day"] = m.beta;
  j["runs"] = m.runs;
  j["outbreak_runs"] = m.outbreak_runs;
  j["conditioned_on_outbreak"] = m.conditioned_on_outbreak;
  return j;
}

std::string opt(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

int cmd_experiment(const Overrides& o, const std::string& name) {
  if (std::find(kExperimentNames.begin(), kExperimentNames.end(), name) == kExperimentNames.end()) {
    std::string msg = "unknown experiment '" + name + "'; valid names:";
    for (const auto& n : kExperimentNames) msg += " " + n;
    throw UsageError(msg);
  }
  Loaded loaded = load(o);
  cli::Settings& s = loaded.settings;
  if (o.seed) s.seed_base = *o.seed;
  if (s.runs < 1) throw UsageError("runs must be >= 1");
  if (s.parallel < 1) throw UsageError("parallel must be >= 1");
  if (name == "rsweep" && s.radii.empty()) throw UsageError("radii must not be empty");
  if (name == "threshold" && s.density_factors.empty()) throw UsageError("density_factors must not be empty");

  abm::SimConfig base = s.sim;
  base.seed = s.seed_base;
  base.validate();
  if (base.dt == 0.0) base.dt = base.default_dt();
  if (name != "rsweep" && name != "threshold") print_warnings(base);

  std::ostringstream body;
  body << cli::to_config_text(base) << "runs = " << s.runs << '\n' << "seed_base = " << s.seed_base << '\n';
  if (name == "rsweep") body << "radii = \"" << list_text(s.radii) << " m\"\n";
  if (name == "threshold") body << "density_factors = \"" << list_text(s.density_factors) << "\"\n";
  if (name == "contact-rate") body << "t_obs = \"" << num(s.t_obs) << " day\"\n";
  if (name == "profile-ratio") body << "min_entries = " << s.min_entries << '\n';
  const std::string body_text = body.str();
  const std::string stem =
      name + "_" + cli::hex64(cli::fnv1a64(name + "\n" + body_text)) + "_" + std::to_string(s.seed_base);

  ensure_dir(o.out_dir);
  const fs::path dir(o.out_dir);
  const std::string table_name = stem + ".csv";
  auto table = open_out(dir / table_name);
  table.precision(12);
  json summary;
  summary["experiment"] = name;
  summary["seed_base"] = s.seed_base;
  summary["runs"] = s.runs;
  std::vector<std::string> files{table_name};

  if (name == "compare") {
    const experiments::EnsembleSpec spec{base, s.runs, s.seed_base, s.parallel};
    const auto m = experiments::compare_sim_ode(spec);
    table << "t,i_sim_mean,i_ode\n";
    for (std::size_t k = 0; k < m.sim_mean.size(); ++k) {
      table << m.sim_mean.times[k] << ',' << m.sim_mean.states[k].i << ',' << m.ode_curve.states[k].i << '\n';
    }
    summary["metrics"] = metrics_json(m);
    std::printf("linf_norm = %.4g  peak_time_err = %.4g  peak_height_err = %.4g  final size %.1f (analytic %.1f)\n",
                m.linf_norm, m.peak_time_err, m.peak_height_err, m.final_size_sim_mean, m.final_size_analytic);
  } else if (name == "rsweep") {
    const auto rows = experiments::r_sweep(base, s.radii, s.runs, s.seed_base, s.parallel);
    table << "radius_m,linf_norm,peak_time_sim_day,peak_time_ode_day,peak_time_err,peak_height_err,"
             "growth_rate_sim_per_day,growth_rate_model_per_day,final_size_sim_mean,final_size_analytic,"
             "outbreak_runs,diagnostic\n";
    std::vector<double> xs, ys, peaks;
    json jrows = json::array();
    for (const auto& r : rows) {
      json jr{{"radius_m", r.radius}};
      if (!r.metrics) {
        table << r.radius << ",,,,,,,,,,,\"" << r.diagnostic << "\"\n";
        jr["diagnostic"] = r.diagnostic;
        std::fprintf(stderr, "warning: R = %g m skipped: %s\n", r.radius, r.diagnostic.c_str());
      } else {
        const auto& m = *r.metrics;
        table << r.radius << ',' << m.linf_norm << ',' << m.peak_sim.t << ',' << m.peak_ode.t << ','
              << m.peak_time_err << ',' << m.peak_height_err << ',' << opt(m.growth_rate_sim) << ','
              << m.growth_rate_model << ',' << m.final_size_sim_mean << ',' << m.final_size_analytic << ','
              << m.outbreak_runs << ",\n";
        jr["metrics"] = metrics_json(m);
        peaks.push_back(m.peak_sim.t);
        if (m.growth_rate_sim) {
          xs.push_back(r.radius);
          ys.push_back(*m.growth_rate_sim + base.delta);
        }
        std::printf("R = %g m  linf_norm = %.4g  peak t = %.4g day (ode %.4g)\n", r.radius, m.linf_norm,
                    m.peak_sim.t, m.peak_ode.t);
      }
      jrows.push_back(jr);
    }
    summary["rows"] = jrows;
    bool decreasing = peaks.size() == rows.size();
    for (std::size_t k = 1; k < peaks.size(); ++k) decreasing = decreasing && peaks[k] < peaks[k - 1];
    summary["peak_time_strictly_decreasing"] = decreasing;
    if (xs.size() >= 2) {
      const auto fit = experiments::fit_proportional(xs, ys);
      summary["growth_plus_delta_vs_radius"] = {{"slope_per_day_per_m", fit.slope},
                                                {"max_relative_deviation", fit.max_relative_deviation}};
    }
  } else if (name == "threshold") {
    const auto rows = experiments::threshold_scan(base, s.density_factors, s.runs, s.seed_base, s.parallel);
    table << "factor,rho_per_m2,r0,outbreak_probability,mean_final_fraction,mean_final_fraction_all_runs,"
             "analytic_fraction,runs\n";
    json jrows = json::array();
    for (const auto& r : rows) {
      table << r.factor << ',' << r.rho << ',' << r.r0 << ',' << r.outbreak_probability << ','
            << r.mean_final_fraction << ',' << r.mean_final_fraction_all_runs << ',' << r.analytic_fraction << ','
            << r.runs << '\n';
      jrows.push_back({{"factor", r.factor},
                       {"rho_per_m2", r.rho},
                       {"r0", r.r0},
                       {"outbreak_probability", r.outbreak_probability},
                       {"mean_final_fraction", r.mean_final_fraction},
                       {"analytic_fraction", r.analytic_fraction}});
      std::printf("factor %g  R0 = %.3g  outbreak probability = %.3g  mean final fraction = %.4g (analytic %.4g)\n",
                  r.factor, r.r0, r.outbreak_probability, r.mean_final_fraction, r.analytic_fraction);
    }
    summary["rows"] = jrows;
  } else if (name == "profile-ratio") {
    const auto r = experiments::profile_ratio_experiment(base, s.runs, s.seed_base, s.parallel);
    const auto a = experiments::chord_acceptance_estimate(base, s.min_entries);
    table << "profile,growth_rate_per_day\n"
          << "uniform," << opt(r.growth_uniform) << '\n'
          << "chord," << opt(r.growth_chord) << '\n';
    summary["growth_uniform_per_day"] = r.growth_uniform ? json(*r.growth_uniform) : json(nullptr);
    summary["growth_chord_per_day"] = r.growth_chord ? json(*r.growth_chord) : json(nullptr);
    summary["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
    summary["expected_ratio"] = std::numbers::pi / 4.0;
    summary["acceptance"] = {{"entries", a.entries}, {"accepted", a.accepted}, {"ratio", a.ratio}};
    if (!r.ratio) std::fprintf(stderr, "warning: growth fit failed for at least one profile\n");
    std::printf("ratio = %s  acceptance = %.5g over %llu entries  (pi/4 = %.5g)\n",
                r.ratio ? num(*r.ratio).c_str() : "n/a", a.ratio, static_cast<unsigned long long>(a.entries),
                std::numbers::pi / 4.0);
  } else if (name == "contact-rate") {
    abm::SimConfig observed = base;
    observed.seed = experiments::run_config({base, 1, s.seed_base, 1}, 0).seed;
    const auto stats = abm::measure_contact_rate(observed, s.t_obs);
    const auto hist = abm::impact_histogram(observed, s.t_obs);
    const double expected = kinetics::contact_rate_population(base.speed, base.kinetic_params());
    const double rel = expected > 0.0 ? std::abs(stats.mean_rate - expected) / expected : 0.0;
    table << "mean_rate_per_day,ci_half_width_per_day,sd_per_day,expected_per_day,relative_error,agents,"
             "entries,observed_days\n"
          << stats.mean_rate << ',' << stats.ci_half_width << ',' << stats.sd << ',' << expected << ',' << rel
          << ',' << stats.agents << ',' << stats.entries << ',' << stats.observed_days << '\n';
    const std::string hist_name = stem + "_impacts.csv";
    auto hout = open_out(dir / hist_name);
    hout << "bin_lo_m,bin_hi_m,count\n";
    const auto& counts = hist.counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double w = base.radius / static_cast<double>(counts.size());
      hout << num(w * static_cast<double>(k)) << ',' << num(w * static_cast<double>(k + 1)) << ',' << counts[k]
           << '\n';
    }
    files.push_back(hist_name);
    summary["mean_rate_per_day"] = stats.mean_rate;
    summary["ci_half_width_per_day"] = stats.ci_half_width;
    summary["expected_per_day"] = expected;
    summary["relative_error"] = rel;
    summary["entries"] = stats.entries;
    if (!hist.empty()) summary["impact_uniform_p_value"] = hist.uniform_p_value();
    std::printf("CR measured %.5g +- %.3g /day, expected %.5g /day (relative error %.3g)\n", stats.mean_rate,
                stats.ci_half_width, expected, rel);
  }
  table.close();

  const std::string summary_name = stem + "_summary.json";
  {
    auto out = open_out(dir / summary_name);
    out << summary.dump(2) << '\n';
  }
  files.push_back(summary_name);
  write_manifest(dir / (stem + "_manifest.txt"), "experiment " + name, loaded.input_hash, body_text, files,
                 {{"parallel", std::to_string(s.parallel)}});
  std::printf("wrote %s\n", (dir / table_name).string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximity worm spread among mobile wireless devices"};
  app.set_version_flag("--version", std::string(WORMSIM_VERSION));
  app.require_subcommand(1);

  Overrides analytic_o, simulate_o, experiment_o;
  std::string csv_path;
  std::string experiment_name;

  auto* analytic = app.add_subcommand("analytic", "contact rate, transmission rates, threshold and final size");
  add_common(analytic, analytic_o, false);
  analytic->add_option("--csv", csv_path, "also write the report as CSV");

  auto* simulate = app.add_subcommand("simulate", "one agent-based run: series, events and manifest");
  add_common(simulate, simulate_o, false);

  auto* experiment = app.add_subcommand("experiment", "ensemble experiments");
  experiment->add_option("name", experiment_name, "compare | rsweep | threshold | profile-ratio | contact-rate")
      ->required();
  add_common(experiment, experiment_o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (analytic->parsed()) return cmd_analytic(analytic_o, csv_path);
    if (simulate->parsed()) return cmd_simulate(simulate_o);
    if (experiment->parsed()) return cmd_experiment(experiment_o, experiment_name);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
