// The experiment drivers behind the CLI subcommands. Each takes a parsed
// config and writes CSV or JSON to a stream, so tests can run them in-process
// and byte-compare outputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "incmech/config.hpp"
#include "incmech/csv.hpp"
#include "incmech/equilibrium.hpp"
#include "incmech/sweep.hpp"
#include "json.hpp"

namespace incmech {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kVerificationFailure = 2,
  kNonConvergence = 3,
};

namespace detail {

inline AccuracyModel with_complexity(AccuracyModel model, double k) {
  if (model.kind != AccuracyKind::PowerLaw) {
    model.k = k;
    model.validate();
  }
  return model;
}

inline std::mt19937_64 draw_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

}  // namespace detail

// --------------------------------------------------------------------------
// individual-sweep: solo optimum and utility across a log-spaced cost sweep,
// one row per (c, k), with the viability cutoff alongside.
// Columns: c, k, m_star, u_star, c_max
// --------------------------------------------------------------------------
inline int cmd_individual_sweep(const Config& cfg, std::ostream& out) {
  const AccuracyModel base = accuracy_from_config(cfg);
  const SweepSpec sweep = sweep_from_config(cfg, "c", 1e-4, 1.0, 60);
  if (sweep.parameter != "c")
    throw std::invalid_argument("individual-sweep: sweep.parameter must be c");
  std::vector<double> ks = cfg.get_list("sweep.k", {1.0, 4.0, 16.0});
  if (base.kind == AccuracyKind::PowerLaw) ks = {0.0};

  const std::vector<double> costs = sweep.grid();
  struct Row {
    double c{}, k{}, m_star{}, u_star{}, c_max{};
  };
  std::vector<double> cutoffs(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j)
    cutoffs[j] = viability_threshold(detail::with_complexity(base, ks[j] > 0 ? ks[j] : base.k));

  const std::size_t total = ks.size() * costs.size();
  const std::vector<Row> rows = parallel_map<Row>(total, [&](std::size_t idx) {
    const std::size_t j = idx / costs.size();
    const std::size_t i = idx % costs.size();
    const AccuracyModel model =
        detail::with_complexity(base, ks[j] > 0 ? ks[j] : base.k);
    Row row;
    row.c = costs[i];
    row.k = ks[j];
    row.m_star = individual_optimum(model, Agent{row.c});
    row.u_star = row.m_star > 0.0 ? utility(model, Agent{row.c}, row.m_star) : 0.0;
    row.c_max = cutoffs[j];
    return row;
  });

  write_csv_row(out, {"c", "k", "m_star", "u_star", "c_max"});
  for (const Row& r : rows)
    write_csv_row(out, {format_number(r.c), format_number(r.k),
                        format_number(r.m_star), format_number(r.u_star),
                        format_number(r.c_max)});
  return kOk;
}

// --------------------------------------------------------------------------
// equilibrium-sweep: the shaping equilibrium of n identical agents across a
// sweep of n, c or k. Every 10th point is grid-certified; non-converged
// points are flagged in the status column and the sweep continues.
// Columns: n, c, k, total_data, per_agent, nash_regret, status
// --------------------------------------------------------------------------
inline int cmd_equilibrium_sweep(const Config& cfg, std::ostream& out) {
  const AccuracyModel base = accuracy_from_config(cfg);
  MechanismSpec mech = mechanism_from_config(cfg);
  if (cfg.has("population.costs") || cfg.has("population.costs.kind"))
    throw std::invalid_argument(
        "equilibrium-sweep: uses identical-cost populations "
        "(population.cost + population.n)");
  const double c0 = cfg.get_double("population.cost", 0.1);
  const long n0 = cfg.get_long("population.n", 10000);
  {
    const std::string warning =
        epsilon_warning(mech, Population::from_costs({c0}));
    if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  }
  const SweepSpec sweep = sweep_from_config(cfg, "n", 1e3, 1e5, 9);
  if (sweep.parameter != "n" && sweep.parameter != "c" && sweep.parameter != "k")
    throw std::invalid_argument("equilibrium-sweep: sweep.parameter must be n, c or k");
  if (sweep.parameter == "k" && base.kind == AccuracyKind::PowerLaw)
    throw std::invalid_argument(
        "equilibrium-sweep: the power-law model has no complexity k to sweep");

  struct Row {
    long n{};
    double c{}, k{}, total{}, per_agent{};
    double regret{-1.0};  // negative = not certified at this point
    bool converged{true};
  };
  const std::vector<double> grid_values = sweep.grid();
  const std::vector<Row> rows =
      parallel_map<Row>(grid_values.size(), [&](std::size_t idx) {
        Row row;
        row.n = n0;
        row.c = c0;
        row.k = base.kind == AccuracyKind::PowerLaw ? 0.0 : base.k;
        if (sweep.parameter == "n")
          row.n = std::max(1L, std::lround(grid_values[idx]));
        else if (sweep.parameter == "c")
          row.c = grid_values[idx];
        else
          row.k = grid_values[idx];
        const AccuracyModel model = sweep.parameter == "k"
                                        ? detail::with_complexity(base, row.k)
                                        : base;
        const Population pop =
            Population::from_costs(std::vector<double>(row.n, row.c));
        ContributionProfile profile;
        try {
          profile = closed_form_equilibrium(mech, model, pop);
        } catch (const FixedPointError& e) {
          row.converged = false;
          profile = e.last_iterate;
          if (profile.size() != static_cast<std::size_t>(row.n))
            profile.assign(row.n, profile.empty() ? 0.0 : profile.front());
        }
        row.total = 0.0;
        for (double m : profile) row.total += m;
        row.per_agent = row.total / static_cast<double>(row.n);
        if (row.converged && idx % 10 == 0) {
          const GridSpec spec{2000, 2};
          if (pop.size() <= 64) {
            row.regret = certify_nash(mech, model, pop, profile, spec);
          } else {
            const AllocationCurve curve = allocation_curve(
                mech, model, pop, 0, row.total - profile[0]);
            row.regret =
                grid_regret_for_curve(curve, row.c, profile[0], spec);
          }
        }
        return row;
      });

  write_csv_row(out, {"n", "c", "k", "total_data", "per_agent", "nash_regret",
                      "status"});
  for (const Row& r : rows)
    write_csv_row(out, {std::to_string(r.n), format_number(r.c),
                        format_number(r.k), format_number(r.total),
                        format_number(r.per_agent),
                        r.regret >= 0.0 ? format_number(r.regret) : "",
                        r.converged ? "ok" : "noconv"});
  return kOk;
}

// --------------------------------------------------------------------------
// min-agents: smallest population size at which the shaping equilibrium turns
// positive, per (c, k) grid point, by binary search over n.
// Columns: c, k, n_min
// --------------------------------------------------------------------------
inline int cmd_min_agents(const Config& cfg, std::ostream& out) {
  const AccuracyModel base = accuracy_from_config(cfg);
  const std::vector<double> cs =
      cfg.get_list("sweep.c", {0.2, 0.4, 0.6, 0.8, 1.0});
  std::vector<double> ks = cfg.get_list("sweep.k", {1.0, 2.0, 4.0});
  if (base.kind == AccuracyKind::PowerLaw) ks = {0.0};

  struct Row {
    double c{}, k{};
    long n_min{};
  };
  const std::size_t total = ks.size() * cs.size();
  const std::vector<Row> rows = parallel_map<Row>(total, [&](std::size_t idx) {
    const std::size_t j = idx / cs.size();
    const std::size_t i = idx % cs.size();
    const AccuracyModel model =
        detail::with_complexity(base, ks[j] > 0 ? ks[j] : base.k);
    Row row;
    row.c = cs[i];
    row.k = ks[j];
    const auto positive = [&](long n) {
      return min_viability_total(model, row.c, static_cast<int>(n)) > 0.0;
    };
    if (individual_optimum(model, Agent{row.c}) > 0.0) {
      row.n_min = 1;
      return row;
    }
    long hi = 2;
    while (!positive(hi) && hi < (1L << 40)) hi *= 2;
    if (!positive(hi)) {
      row.n_min = -1;  // no population size makes this problem viable
      return row;
    }
    long lo = hi / 2;  // positive(lo) is false, positive(hi) is true
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      (positive(mid) ? hi : lo) = mid;
    }
    row.n_min = hi;
    return row;
  });

  write_csv_row(out, {"c", "k", "n_min"});
  for (const Row& r : rows)
    write_csv_row(out, {format_number(r.c), format_number(r.k),
                        std::to_string(r.n_min)});
  return kOk;
}

// --------------------------------------------------------------------------
// two-type: Monte Carlo over realized costs. Each draw samples every agent's
// type from the prior, solves the symmetric two-type fixed point, and records
// contract points, utilities and the low types' information rent. The report
// averages over draws.
// --------------------------------------------------------------------------
inline int cmd_two_type(const Config& cfg, std::ostream& out) {
  const AccuracyModel model = accuracy_from_config(cfg);
  if (!cfg.has("population.two_type.c_low"))
    throw std::invalid_argument(
        "two-type: population.two_type.{c_low,c_high,p} section required");
  const double c_low = cfg.get_double("population.two_type.c_low", 0.0);
  const double c_high = cfg.get_double("population.two_type.c_high", 0.0);
  const double p = cfg.get_double("population.two_type.p", 0.5);
  TwoTypeSpec spec{c_low, c_high, {p}};
  spec.validate(1);
  const int n = static_cast<int>(cfg.get_long("population.n", 10));
  if (n < 1) throw std::invalid_argument("two-type: population.n must be >= 1");
  const double epsilon = cfg.get_double("mechanism.epsilon", 1e-6);
  const MechanismSpec mech = MechanismSpec::shaping_two_type(epsilon);
  {
    const std::string warning =
        epsilon_warning(mech, Population::from_costs({c_low}));
    if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  }
  const int draws = static_cast<int>(cfg.get_long("two_type.draws", 200));
  const std::uint64_t seed = cfg.get_seed();

  struct DrawResult {
    bool converged{true};
    int n_low{0};
    double total{0.0};
    double contract_high{0.0}, contract_low{0.0};
    double u_high{0.0}, u_low{0.0};
    bool has_high{false}, has_low{false};
  };

  const std::vector<DrawResult> results =
      parallel_map<DrawResult>(draws, [&](std::size_t d) {
        DrawResult r;
        auto rng = detail::draw_rng(seed, d);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        int n_low = 0;
        for (int i = 0; i < n; ++i)
          if (u01(rng) < p) ++n_low;
        const int n_high = n - n_low;
        r.n_low = n_low;
        r.has_high = n_high > 0;
        r.has_low = n_low > 0;
        try {
          const auto [xh, xl] = two_type_symmetric_equilibrium(
              model, c_low, c_high, p, epsilon, n_high, n_low);
          r.total = n_high * xh + n_low * xl;
          if (n_high > 0) {
            const double others = (n_high - 1) * xh + n_low * xl;
            const AllocationCurve curve = AllocationCurve::shaping_two_type(
                model, c_low, c_high, p, epsilon, others);
            r.contract_high = curve.menu().contract_high;
            r.u_high = curve(xh) - c_high * xh;
          }
          if (n_low > 0) {
            const double others = n_high * xh + (n_low - 1) * xl;
            const AllocationCurve curve = AllocationCurve::shaping_two_type(
                model, c_low, c_high, p, epsilon, others);
            r.contract_low = curve.menu().contract_low;
            r.u_low = curve(xl) - c_low * xl;
          }
        } catch (const FixedPointError&) {
          r.converged = false;
        }
        return r;
      });

  const double u_high_solo =
      utility(model, Agent{c_high}, individual_optimum(model, Agent{c_high}));
  const double u_low_solo =
      utility(model, Agent{c_low}, individual_optimum(model, Agent{c_low}));

  int ok = 0, high_draws = 0, low_draws = 0;
  double total = 0, m_up = 0, m_down = 0, u_high = 0, u_low = 0, rent = 0;
  for (const DrawResult& r : results) {
    if (!r.converged) continue;
    ++ok;
    total += r.total;
    if (r.has_high) {
      ++high_draws;
      m_up += r.contract_high;
      u_high += r.u_high;
    }
    if (r.has_low) {
      ++low_draws;
      m_down += r.contract_low;
      u_low += r.u_low;
      rent += r.u_low - u_low_solo;
    }
  }

  nlohmann::json report{
      {"n", n},
      {"c_low", c_low},
      {"c_high", c_high},
      {"p", p},
      {"epsilon", epsilon},
      {"draws", draws},
      {"converged_draws", ok},
      {"expected_total", ok ? total / ok : 0.0},
      {"mean_m_up", high_draws ? m_up / high_draws : 0.0},
      {"mean_m_down", low_draws ? m_down / low_draws : 0.0},
      {"mean_high_utility", high_draws ? u_high / high_draws : 0.0},
      {"mean_low_utility", low_draws ? u_low / low_draws : 0.0},
      {"individual_high_utility", u_high_solo},
      {"individual_low_utility", u_low_solo},
      {"mean_information_rent", low_draws ? rent / low_draws : 0.0},
  };
  out << report.dump(2) << '\n';
  return ok > 0 ? kOk : kNonConvergence;
}

}  // namespace incmech
