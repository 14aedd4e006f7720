#pragma once

// Run configuration: an INI file with sections, read with Boost.PropertyTree.
// Every key and default is listed in docs/config.md.

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qcorr/corridor.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/kernels.hpp"
#include "qcorr/quenched.hpp"
#include "qcorr/rates.hpp"

namespace qcorr {

enum class Command { sweep, rate, audit, scenario, check };
enum class Scenario { small_dev, functional, annealed, tail };

inline Command parse_command(const std::string& s) {
  if (s == "sweep") return Command::sweep;
  if (s == "rate") return Command::rate;
  if (s == "audit") return Command::audit;
  if (s == "scenario") return Command::scenario;
  if (s == "check") return Command::check;
  throw ParameterError("unknown command '" + s + "' (expected sweep, rate, audit, scenario or check)");
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "small-dev") return Scenario::small_dev;
  if (s == "functional") return Scenario::functional;
  if (s == "annealed") return Scenario::annealed;
  if (s == "tail") return Scenario::tail;
  throw ParameterError("unknown scenario '" + s + "' (expected small-dev, functional, annealed or tail)");
}

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::small_dev: return "small-dev";
    case Scenario::functional: return "functional";
    case Scenario::annealed: return "annealed";
    case Scenario::tail: return "tail";
  }
  return "?";
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item.substr(b), &used);
    } catch (const std::exception&) {
      throw ParameterError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", b + used) != std::string::npos) throw ParameterError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct CorridorSpec {
  double lower = 0.0;
  double upper = 1.0;
  Window start{0.2, 0.8};
  Window terminal{0.2, 0.8};
  /// Boundary slopes for functional corridors: f(s) = lower + lower_slope s.
  double lower_slope = 0.0;
  double upper_slope = 0.0;

  Corridor constant(double beta) const { return Corridor::constant(lower, upper, start, terminal, beta); }
  Corridor functional(double beta) const {
    const double f0 = lower, f1 = lower_slope, g0 = upper, g1 = upper_slope;
    return Corridor::functional([f0, f1](double s) { return f0 + f1 * s; }, [g0, g1](double s) { return g0 + g1 * s; },
                                start, terminal, beta,
                                "linear:" + exact(f0) + "+" + exact(f1) + "s," + exact(g0) + "+" + exact(g1) + "s");
  }
};

struct RunConfig {
  Command command = Command::check;
  Scenario scenario = Scenario::small_dev;
  std::optional<std::uint64_t> master_seed;
  std::string output_dir = "qcorr-out";
  unsigned workers = 1;

  CorridorSpec corridor{};
  std::vector<double> betas{0.0};
  double horizon = 20.0;
  double env_dt = 1e-3;
  int spatial_points = 201;
  int start_points = 17;
  int ensemble_size = 32;
  std::optional<FitWindow> fit_window;
  SurvivalVariant variant = SurvivalVariant::inf_start;
  StepModel step_model = StepModel::bridge;
  double output_interval = 0.25;
  SeriesConfig series{};

  // audit
  double audit_beta = 1.0;
  std::vector<double> checkpoints{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int audit_environments = 20;

  // scenarios
  double scenario_beta = 0.0;
  double alpha = 0.25;
  std::vector<double> t_grid{100, 1000, 10000};
  double relative_dt = 1e-3;
  std::optional<double> gamma;  // predicted gamma(beta); computed by a sweep when absent
  double tolerance = 0.05;
  double annealed_t = 3.0;
  double tail_t = 2.0;
  double tail_q = 1.5;

  // rate
  std::vector<std::string> curve_files;

  QuenchedOptions quenched() const {
    QuenchedOptions o;
    o.spatial_points = spatial_points;
    o.series = series;
    o.output_interval = output_interval;
    o.step_model = step_model;
    return o;
  }

  SweepConfig sweep(std::vector<double> b) const {
    SweepConfig s;
    s.betas = std::move(b);
    s.ensemble_size = ensemble_size;
    s.horizon = horizon;
    s.env_dt = env_dt;
    s.corridor = corridor.constant(0.0);
    s.variant = variant;
    s.start_points = start_points;
    s.quenched = quenched();
    s.fit_window = fit_window;
    s.master_seed = *master_seed;
    s.workers = workers;
    return s;
  }

  /// Throws ParameterError naming the violated constraint.
  void validate() const {
    require(master_seed.has_value(), "master_seed is mandatory (no wall-clock seeding)");
    require(!output_dir.empty(), "output directory must not be empty");
    series.validate();
    require(spatial_points >= 32, "spatial_points must be at least 32");
    require(start_points >= 1, "start_points must be at least 1");
    require(horizon > 0.0 && env_dt > 0.0 && env_dt <= horizon, "need 0 < env_dt <= horizon");
    require(output_interval >= 0.0, "output_interval must be non-negative");
    const bool functional = command == Command::scenario && scenario == Scenario::functional;
    if (!functional) (void)corridor.constant(0.0);
    switch (command) {
      case Command::sweep:
      case Command::check: (void)sweep(betas).validate(); break;
      case Command::rate: require(!curve_files.empty(), "rate needs at least one curve file"); break;
      case Command::audit:
        require(corridor.start == corridor.terminal,
                "audit needs the terminal window equal to the start window (inf_start variant)");
        require(audit_environments >= 1, "audit needs at least one environment");
        break;
      case Command::scenario:
        if (scenario == Scenario::small_dev)
          require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0,1/2) for the small-deviation scaling");
        if (scenario == Scenario::functional) (void)corridor.functional(scenario_beta);
        if (scenario == Scenario::tail) require(ensemble_size >= 1000, "tail diagnostic needs ensemble_size >= 1000");
        if (scenario == Scenario::tail) require(tail_q > 1.0, "tail exponent q must exceed 1");
        break;
    }
  }
};

namespace detail {

template <class T>
void read_opt(const boost::property_tree::ptree& pt, const std::string& key, T& out) {
  if (auto v = pt.get_optional<std::string>(key)) {
    try {
      out = boost::lexical_cast<T>(*v);
    } catch (const boost::bad_lexical_cast&) {
      throw ParameterError("invalid value for " + key + ": '" + *v + "'");
    }
  }
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  using detail::read_opt;
  if (auto v = pt.get_optional<std::string>("run.command")) c.command = parse_command(*v);
  if (auto v = pt.get_optional<std::string>("run.scenario")) c.scenario = parse_scenario(*v);
  if (auto v = pt.get_optional<std::string>("run.master_seed")) {
    std::uint64_t s = 0;
    read_opt(pt, "run.master_seed", s);
    c.master_seed = s;
  }
  read_opt(pt, "run.output_dir", c.output_dir);
  read_opt(pt, "run.workers", c.workers);

  read_opt(pt, "corridor.lower", c.corridor.lower);
  read_opt(pt, "corridor.upper", c.corridor.upper);
  read_opt(pt, "corridor.start_lo", c.corridor.start.lo);
  read_opt(pt, "corridor.start_hi", c.corridor.start.hi);
  read_opt(pt, "corridor.terminal_lo", c.corridor.terminal.lo);
  read_opt(pt, "corridor.terminal_hi", c.corridor.terminal.hi);
  read_opt(pt, "corridor.lower_slope", c.corridor.lower_slope);
  read_opt(pt, "corridor.upper_slope", c.corridor.upper_slope);

  if (auto v = pt.get_optional<std::string>("sweep.betas")) c.betas = parse_list(*v);
  read_opt(pt, "sweep.horizon", c.horizon);
  read_opt(pt, "sweep.env_dt", c.env_dt);
  read_opt(pt, "sweep.spatial_points", c.spatial_points);
  read_opt(pt, "sweep.start_points", c.start_points);
  read_opt(pt, "sweep.ensemble_size", c.ensemble_size);
  read_opt(pt, "sweep.output_interval", c.output_interval);
  if (auto v = pt.get_optional<std::string>("sweep.fit_window")) {
    const auto w = parse_list(*v);
    require(w.size() == 2, "fit_window needs two values t_min, t_max");
    c.fit_window = FitWindow{w[0], w[1]};
  }
  if (auto v = pt.get_optional<std::string>("sweep.variant")) {
    if (*v == "inf_start") c.variant = SurvivalVariant::inf_start;
    else if (*v == "sup_start") c.variant = SurvivalVariant::sup_start;
    else throw ParameterError("variant must be inf_start or sup_start");
  }
  if (auto v = pt.get_optional<std::string>("sweep.step_model")) {
    if (*v == "bridge") c.step_model = StepModel::bridge;
    else if (*v == "linear") c.step_model = StepModel::linear;
    else throw ParameterError("step_model must be bridge or linear");
  }
  read_opt(pt, "series.relative_tolerance", c.series.relative_tolerance);
  read_opt(pt, "series.max_terms", c.series.max_terms);

  read_opt(pt, "audit.beta", c.audit_beta);
  if (auto v = pt.get_optional<std::string>("audit.checkpoints")) c.checkpoints = parse_list(*v);
  read_opt(pt, "audit.environments", c.audit_environments);

  read_opt(pt, "scenario.beta", c.scenario_beta);
  read_opt(pt, "scenario.alpha", c.alpha);
  if (auto v = pt.get_optional<std::string>("scenario.t_grid")) c.t_grid = parse_list(*v);
  read_opt(pt, "scenario.relative_dt", c.relative_dt);
  if (pt.get_optional<std::string>("scenario.gamma")) {
    double g = 0.0;
    read_opt(pt, "scenario.gamma", g);
    c.gamma = g;
  }
  read_opt(pt, "scenario.tolerance", c.tolerance);
  read_opt(pt, "scenario.annealed_t", c.annealed_t);
  read_opt(pt, "scenario.tail_t", c.tail_t);
  read_opt(pt, "scenario.tail_q", c.tail_q);
  return c;
}

/// QCORR_OUTPUT_DIR and QCORR_WORKERS override the file; nothing else is read from the environment.
inline void apply_environment_overrides(RunConfig& c) {
  if (const char* d = std::getenv("QCORR_OUTPUT_DIR"); d && *d) c.output_dir = d;
  if (const char* w = std::getenv("QCORR_WORKERS"); w && *w) {
    try {
      c.workers = static_cast<unsigned>(std::stoul(w));
    } catch (const std::exception&) {
      throw ParameterError(std::string("QCORR_WORKERS is not a non-negative integer: ") + w);
    }
  }
}

/// Canonical key=value listing of the resolved configuration (for manifests).
inline std::string describe(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + exact(v[i]);
    return s;
  };
  os << "master_seed=" << (c.master_seed ? std::to_string(*c.master_seed) : "unset") << "\n"
     << "corridor=" << exact(c.corridor.lower) << "," << exact(c.corridor.upper) << " start=" << exact(c.corridor.start.lo)
     << "," << exact(c.corridor.start.hi) << " terminal=" << exact(c.corridor.terminal.lo) << ","
     << exact(c.corridor.terminal.hi) << " slopes=" << exact(c.corridor.lower_slope) << ","
     << exact(c.corridor.upper_slope) << "\n"
     << "betas=" << list(c.betas) << "\nhorizon=" << exact(c.horizon) << "\nenv_dt=" << exact(c.env_dt)
     << "\nspatial_points=" << c.spatial_points << "\nstart_points=" << c.start_points
     << "\nensemble_size=" << c.ensemble_size << "\nvariant=" << to_string(c.variant)
     << "\nstep_model=" << (c.step_model == StepModel::bridge ? "bridge" : "linear")
     << "\noutput_interval=" << exact(c.output_interval) << "\nseries=" << exact(c.series.relative_tolerance) << ","
     << c.series.max_terms << "\n";
  if (c.fit_window) os << "fit_window=" << exact(c.fit_window->lo) << "," << exact(c.fit_window->hi) << "\n";
  return os.str();
}

}  // namespace qcorr
