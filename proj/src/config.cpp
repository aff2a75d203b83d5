#include "wormsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "wormsim/error.hpp"
#include "wormsim/units.hpp"

namespace wormsim::cli {
namespace {

using units::Dimension;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

template <class T>
T parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("'" + std::string(key) + "' expects a nonnegative integer, got '" +
                     std::string(text) + "'");
  }
  return value;
}

double parse_plain(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("'" + std::string(key) + "' expects a plain number, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_plain_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(parse_plain(key, item));
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("'" + std::string(key) + "' must not be empty");
  return out;
}

double with_units(std::string_view key, std::string_view text, Dimension d) {
  try {
    return units::parse(text, d);
  } catch (const UsageError& e) {
    throw UsageError("'" + std::string(key) + "': " + e.what());
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      if (line[k] == '#' && !quoted) {
        line = line.substr(0, k);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw UsageError("line " + std::to_string(line_no) + ": empty key");
    if (out.contains(key)) {
      throw UsageError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    out.emplace(std::move(key), unquote(line.substr(eq + 1)));
  }
  return out;
}

void apply(Settings& settings, const KeyValues& values) {
  abm::SimConfig& sim = settings.sim;
  std::string speed_model;
  std::string speed_text;
  std::vector<std::string> unknown;

  for (const auto& [key, value] : values) {
    if (key.starts_with("manifest.")) continue;
    if (key == "n") sim.n = parse_integer<std::size_t>(key, value);
    else if (key == "rho" || key == "density") sim.rho = with_units(key, value, Dimension::Density);
    else if (key == "radius" || key == "R") sim.radius = with_units(key, value, Dimension::Length);
    else if (key == "speed") speed_text = value;
    else if (key == "speed_model") speed_model = lower(value);
    else if (key == "p") sim.p = parse_plain(key, value);
    else if (key == "delta") sim.delta = with_units(key, value, Dimension::Rate);
    else if (key == "profile") {
      const auto v = lower(value);
      if (v == "uniform") sim.profile = abm::Profile::Uniform;
      else if (v == "chord") sim.profile = abm::Profile::Chord;
      else throw UsageError("'profile' must be 'uniform' or 'chord', got '" + value + "'");
    } else if (key == "dt") sim.dt = lower(value) == "auto" ? 0.0 : with_units(key, value, Dimension::Duration);
    else if (key == "t_end") sim.t_end = with_units(key, value, Dimension::Duration);
    else if (key == "seed") {
      sim.seed = parse_integer<std::uint64_t>(key, value);
      settings.seed_given = true;
    } else if (key == "initial_infected") sim.initial_infected = parse_integer<std::size_t>(key, value);
    else if (key == "sample_every") sim.sample_every = parse_integer<std::size_t>(key, value);
    else if (key == "runs") settings.runs = parse_integer<std::size_t>(key, value);
    else if (key == "seed_base") settings.seed_base = parse_integer<std::uint64_t>(key, value);
    else if (key == "parallel") settings.parallel = parse_integer<std::size_t>(key, value);
    else if (key == "radii") {
      try {
        settings.radii = units::parse_list(value, Dimension::Length);
      } catch (const UsageError& e) {
        throw UsageError("'radii': " + std::string(e.what()));
      }
    } else if (key == "density_factors") settings.density_factors = parse_plain_list(key, value);
    else if (key == "t_obs") settings.t_obs = with_units(key, value, Dimension::Duration);
    else if (key == "min_entries") settings.min_entries = parse_integer<std::uint64_t>(key, value);
    else unknown.push_back(key);
  }

  if (!unknown.empty()) {
    std::string msg = "unknown configuration key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw UsageError(msg);
  }

  if (!speed_text.empty() || !speed_model.empty()) {
    double speed = kinetics::mean_speed(sim.speed);
    if (!speed_text.empty()) speed = with_units("speed", speed_text, Dimension::Speed);
    std::string model = speed_model;
    if (model.empty()) {
      model = std::holds_alternative<kinetics::MaxwellBoltzmann2D>(sim.speed) ? "maxwell-boltzmann" : "constant";
    }
    if (model == "constant") sim.speed = kinetics::ConstantSpeed{speed};
    else if (model == "maxwell-boltzmann" || model == "mb" || model == "rayleigh") {
      sim.speed = kinetics::MaxwellBoltzmann2D{speed};
    } else {
      throw UsageError("'speed_model' must be 'constant' or 'maxwell-boltzmann', got '" + model + "'");
    }
  }
}

std::string to_config_text(const abm::SimConfig& config) {
  std::ostringstream os;
  const bool mb = std::holds_alternative<kinetics::MaxwellBoltzmann2D>(config.speed);
  const double speed = mb ? std::get<kinetics::MaxwellBoltzmann2D>(config.speed).mean
                          : std::get<kinetics::ConstantSpeed>(config.speed).speed;
  os << "n = " << config.n << '\n'
     << "rho = \"" << units::format(config.rho, Dimension::Density) << "\"\n"
     << "radius = \"" << units::format(config.radius, Dimension::Length) << "\"\n"
     << "speed_model = \"" << (mb ? "maxwell-boltzmann" : "constant") << "\"\n"
     << "speed = \"" << units::format(speed, Dimension::Speed) << "\"\n"
     << "p = " << num(config.p) << '\n'
     << "delta = \"" << units::format(config.delta, Dimension::Rate) << "\"\n"
     << "profile = \"" << (config.profile == abm::Profile::Chord ? "chord" : "uniform") << "\"\n"
     << "dt = \"" << units::format(config.step(), Dimension::Duration) << "\"\n"
     << "t_end = \"" << units::format(config.t_end, Dimension::Duration) << "\"\n"
     << "seed = " << config.seed << '\n'
     << "initial_infected = " << config.initial_infected << '\n'
     << "sample_every = " << config.sample_every << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace wormsim::cli
