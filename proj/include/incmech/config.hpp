// Plain nested key-value configuration: one `key = value` per line, dotted
// keys for sections, '#' starts a comment. Typed accessors raise
// std::invalid_argument with the offending key in the message.
//
//   accuracy.kind = full          # simple | full | powerlaw
//   accuracy.a_opt = 0.95
//   accuracy.k = 1
//   population.cost = 0.1         # identical agents, or population.costs = list
//   population.n = 10000
//   mechanism.kind = shaping      # standard | shaping | shaping2t
//   mechanism.epsilon = 1e-6
//   sweep.parameter = n
//   sweep.low = 1000
//   sweep.high = 100000
//   sweep.points = 9
//   sweep.scale = log
//   seed = 42
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmech/agents.hpp"
#include "incmech/mechanisms.hpp"

namespace incmech {

class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                    " is not of the form key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw std::invalid_argument("config: empty key on line " +
                                    std::to_string(lineno));
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw std::invalid_argument("config: cannot open '" + path + "'");
    return parse(in);
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // Applies a `key=value` override as passed on the command line.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("override must be key=value, got '" + kv + "'");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return parse_double(key, it->second);
  }

  long get_long(const std::string& key, long dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      std::size_t pos = 0;
      const double asd = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      const long v = static_cast<long>(asd);
      if (static_cast<double>(v) != asd) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key +
                                  "' expects an integer, got '" + it->second + "'");
    }
  }

  std::uint64_t get_seed(std::uint64_t dflt = 42) const {
    return static_cast<std::uint64_t>(get_long("seed", static_cast<long>(dflt)));
  }

  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      out.push_back(parse_double(key, t));
    }
    if (out.empty())
      throw std::invalid_argument("config: key '" + key + "' expects a list");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static double parse_double(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key +
                                  "' expects a number, got '" + text + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

// --- typed sections -------------------------------------------------------

inline AccuracyModel accuracy_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string("accuracy.kind", "full");
  if (kind == "simple")
    return AccuracyModel::simple_bound(cfg.get_double("accuracy.a_opt", 0.95),
                                       cfg.get_double("accuracy.k", 1.0));
  if (kind == "full")
    return AccuracyModel::full_bound(cfg.get_double("accuracy.a_opt", 0.95),
                                     cfg.get_double("accuracy.k", 1.0));
  if (kind == "powerlaw")
    return AccuracyModel::power_law(cfg.get_double("accuracy.beta", 1.0),
                                    cfg.get_double("accuracy.alpha", 1.0),
                                    cfg.get_double("accuracy.tau", 0.0));
  throw std::invalid_argument("config: accuracy.kind must be simple|full|powerlaw");
}

// Writes the accuracy section back out in config syntax.
inline std::string accuracy_to_config(const AccuracyModel& model) {
  std::ostringstream os;
  os << "accuracy.kind = " << to_string(model.kind) << '\n';
  os.precision(17);
  if (model.kind == AccuracyKind::PowerLaw) {
    os << "accuracy.beta = " << model.beta << '\n'
       << "accuracy.alpha = " << model.alpha << '\n'
       << "accuracy.tau = " << model.tau << '\n';
  } else {
    os << "accuracy.a_opt = " << model.a_opt << '\n'
       << "accuracy.k = " << model.k << '\n';
  }
  return os.str();
}

// Population from either an explicit cost list, an identical-cost shortcut
// (population.cost + population.n), or a seeded log-uniform generator. A
// two-type section attaches the screening prior; its agents start at the high
// cost and are re-realized per Monte Carlo draw by the callers.
inline Population population_from_config(const Config& cfg, std::uint64_t seed) {
  Population pop;
  if (cfg.has("population.costs")) {
    pop = Population::from_costs(cfg.get_list("population.costs", {}));
  } else if (cfg.get_string("population.costs.kind", "") == "loguniform") {
    const double lo = cfg.get_double("population.costs.low", 0.01);
    const double hi = cfg.get_double("population.costs.high", 1.0);
    const long n = cfg.get_long("population.costs.n", 10);
    if (!(lo > 0.0) || !(hi >= lo) || n < 1)
      throw std::invalid_argument("config: bad loguniform cost generator");
    std::mt19937_64 rng(
        static_cast<std::uint64_t>(cfg.get_long("population.costs.seed",
                                                 static_cast<long>(seed))));
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    std::vector<double> costs(n);
    for (double& c : costs) c = std::exp(u(rng));
    pop = Population::from_costs(costs);
  } else {
    const double c = cfg.get_double("population.cost", 0.1);
    const long n = cfg.get_long("population.n", 10000);
    if (n < 1) throw std::invalid_argument("config: population.n must be >= 1");
    pop = Population::from_costs(std::vector<double>(n, c));
  }
  if (cfg.has("population.two_type.c_low") || cfg.has("population.two_type.c_high")) {
    pop.has_two_type = true;
    pop.two_type.c_low = cfg.get_double("population.two_type.c_low", 0.0);
    pop.two_type.c_high = cfg.get_double("population.two_type.c_high", 0.0);
    pop.two_type.p.assign(pop.size(), cfg.get_double("population.two_type.p", 0.5));
    for (Agent& a : pop.agents) a.cost = pop.two_type.c_high;
    pop.validate();
  }
  return pop;
}

inline MechanismSpec mechanism_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string("mechanism.kind", "shaping");
  MechanismSpec mech;
  if (kind == "standard")
    mech.kind = MechanismKind::StandardFederated;
  else if (kind == "shaping")
    mech.kind = MechanismKind::ShapingKnown;
  else if (kind == "shaping2t")
    mech.kind = MechanismKind::ShapingTwoType;
  else
    throw std::invalid_argument(
        "config: mechanism.kind must be standard|shaping|shaping2t");
  mech.epsilon = cfg.get_double("mechanism.epsilon", 1e-6);
  mech.validate();
  return mech;
}

struct SweepSpec {
  std::string parameter;
  double low{0.0};
  double high{0.0};
  int points{0};
  bool log_scale{true};

  std::vector<double> grid() const {
    if (points < 1 || !(high >= low))
      throw std::invalid_argument("config: sweep range is empty");
    std::vector<double> xs(points);
    if (points == 1) {
      xs[0] = low;
      return xs;
    }
    for (int i = 0; i < points; ++i) {
      const double t = static_cast<double>(i) / (points - 1);
      xs[i] = log_scale ? std::exp(std::log(low) + t * (std::log(high) - std::log(low)))
                        : low + t * (high - low);
    }
    return xs;
  }
};

inline SweepSpec sweep_from_config(const Config& cfg, const std::string& dflt_param,
                                   double dflt_lo, double dflt_hi, int dflt_points) {
  SweepSpec s;
  s.parameter = cfg.get_string("sweep.parameter", dflt_param);
  s.low = cfg.get_double("sweep.low", dflt_lo);
  s.high = cfg.get_double("sweep.high", dflt_hi);
  s.points = static_cast<int>(cfg.get_long("sweep.points", dflt_points));
  const std::string scale = cfg.get_string("sweep.scale", "log");
  if (scale == "log")
    s.log_scale = true;
  else if (scale == "linear")
    s.log_scale = false;
  else
    throw std::invalid_argument("config: sweep.scale must be linear|log");
  if (s.log_scale && !(s.low > 0.0))
    throw std::invalid_argument("config: log sweeps need a positive lower bound");
  return s;
}

}  // namespace incmech
