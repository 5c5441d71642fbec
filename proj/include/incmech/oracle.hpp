// Brute-force verification layer: grid-search best responses, Nash-regret
// certification, and an enumerated-alternatives check of the data-maximizing
// property. Everything here works through the allocation curves and utilities
// only; the analytic best-response and equilibrium solvers are never invoked,
// so these routines can certify them.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmech/mechanisms.hpp"

namespace incmech {

struct GridSpec {
  int points_per_agent{10000};
  int refine_passes{2};  // each pass zooms 10x around the incumbent

  void validate() const {
    if (points_per_agent < 100)
      throw std::invalid_argument("grid: need at least 100 points per agent");
    if (refine_passes < 0)
      throw std::invalid_argument("grid: refine_passes must be >= 0");
  }
  // Step size of the final refinement pass for an agent with cost c.
  double resolution(double cost) const {
    double span = 1.0 / cost;
    for (int r = 0; r < refine_passes; ++r) span /= 10.0;
    return span / points_per_agent;
  }
};

namespace detail {

// Exhaustive maximization of fn over [0, ub] with zooming refinement.
// Ties break toward the larger argument.
template <class Fn>
double grid_argmax(Fn&& fn, double ub, const GridSpec& grid) {
  double lo = 0.0, hi = ub;
  double best_m = 0.0;
  double best_v = fn(0.0);
  for (int pass = 0; pass <= grid.refine_passes; ++pass) {
    const int n = grid.points_per_agent;
    for (int j = 0; j <= n; ++j) {
      const double m = lo + (hi - lo) * j / n;
      const double v = fn(m);
      if (v >= best_v) {
        best_v = v;
        best_m = m;
      }
    }
    const double span = (hi - lo) / 10.0;
    lo = std::max(0.0, best_m - 0.5 * span);
    hi = std::min(ub, best_m + 0.5 * span);
  }
  return best_m;
}

}  // namespace detail

// Best grid point of agent i's utility against the mechanism, the others'
// contributions held fixed at the given profile.
inline double grid_best_response(const MechanismSpec& mech, const AccuracyModel& model,
                                 const Population& pop, std::size_t i,
                                 const std::vector<double>& profile,
                                 const GridSpec& grid = {}) {
  grid.validate();
  const double cost = pop.cost(i);
  const AllocationCurve curve =
      allocation_curve(mech, model, pop, i, others_total(profile, i));
  return detail::grid_argmax([&](double m) { return curve(m) - cost * m; },
                             1.0 / cost, grid);
}

// Max over agents of the best unilateral grid improvement; an equilibrium
// claim requires this to stay below 1e-4 utility units.
inline double certify_nash(const MechanismSpec& mech, const AccuracyModel& model,
                           const Population& pop,
                           const std::vector<double>& profile,
                           const GridSpec& grid = {}) {
  double regret = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double cost = pop.cost(i);
    const AllocationCurve curve =
        allocation_curve(mech, model, pop, i, others_total(profile, i));
    const auto u = [&](double m) { return curve(m) - cost * m; };
    const double best = detail::grid_argmax(u, 1.0 / cost, grid);
    regret = std::max(regret, u(best) - u(profile[i]));
  }
  return std::max(0.0, regret);
}

// Grid regret of holding at_m against a single allocation curve; used to
// certify representative agents of large symmetric populations without
// instantiating the whole profile.
inline double grid_regret_for_curve(const AllocationCurve& curve, double cost,
                                    double at_m, const GridSpec& grid = {}) {
  const auto u = [&](double m) { return curve(m) - cost * m; };
  const double best = detail::grid_argmax(u, 1.0 / cost, grid);
  return std::max(0.0, u(best) - u(at_m));
}

// ---------------------------------------------------------------------------
// Data-maximization spot check: enumerate perturbed piecewise-linear
// mechanisms (shifted incentive breakpoints, rescaled segment slopes), find
// each one's grid equilibrium, and confirm that no feasible + IR alternative
// collects more total data than the shaping mechanism.
// ---------------------------------------------------------------------------

// A mechanism under test: returns agent i's accuracy curve for a fixed total
// contribution of the others. The returned callable must be cheap to evaluate.
using CurveFactory =
    std::function<std::function<double(double)>(std::size_t, double)>;

namespace detail {

inline std::vector<double> grid_equilibrium(const CurveFactory& factory,
                                            const AccuracyModel& model,
                                            const Population& pop,
                                            const GridSpec& grid,
                                            int max_iter = 120) {
  const auto iterate = [&](std::vector<double> profile) {
    for (int it = 0; it < max_iter; ++it) {
      std::vector<double> next(profile.size());
      double change = 0.0;
      for (std::size_t i = 0; i < pop.size(); ++i) {
        const double cost = pop.cost(i);
        const auto curve = factory(i, others_total(profile, i));
        const double br = grid_argmax(
            [&](double m) { return curve(m) - cost * m; }, 1.0 / cost, grid);
        next[i] = 0.5 * profile[i] + 0.5 * br;
        change = std::max(change, std::abs(next[i] - profile[i]));
      }
      profile = next;
      if (change < grid.resolution(pop.min_cost())) break;
    }
    return profile;
  };

  std::vector<double> init(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i)
    init[i] = individual_optimum(model, Agent{pop.cost(i)});
  std::vector<double> eq = iterate(init);

  double total = 0.0;
  for (double m : eq) total += m;
  if (total <= 0.0) {
    // Zero is always an equilibrium; probe a positive seed in case the
    // mechanism can lift the population over the viability threshold.
    for (std::size_t i = 0; i < pop.size(); ++i) init[i] = 0.2 / pop.cost(i);
    std::vector<double> alt = iterate(init);
    double alt_total = 0.0;
    for (double m : alt) alt_total += m;
    if (alt_total > total) eq = alt;
  }
  return eq;
}

}  // namespace detail

struct SpotCheckEntry {
  std::string name;
  bool feasible{true};
  bool ir{true};
  double total{0.0};
  double excess{0.0};  // total minus the shaping total, when admissible
};

struct SpotCheckReport {
  double shaping_total{0.0};
  double worst_excess{0.0};
  bool pass{true};
  std::vector<SpotCheckEntry> entries;
};

// Shaping-style curve whose incentive line starts at (solo optimum + shift)
// and climbs with slope cost*slope_scale + epsilon; (0, 1) is the shaping
// mechanism itself. slope_scale < 1 variants undercut the agent's cost and
// are expected to fail IR.
inline CurveFactory perturbed_shaping_factory(const AccuracyModel& model,
                                              const Population& pop,
                                              double epsilon, double shift,
                                              double slope_scale) {
  return [&model, &pop, epsilon, shift, slope_scale](std::size_t i, double others) {
    const double cost = pop.cost(i);
    const double start = individual_optimum(model, Agent{cost}) + shift;
    const double line_slope = cost * slope_scale + epsilon;
    const double sat = solve_max_contribution(model, cost * slope_scale, epsilon,
                                              start, others);
    const double start_acc = model.eval(start);
    return [&model, others, start, sat, start_acc, line_slope](double own_m) {
      double acc;
      if (own_m <= start)
        acc = model.eval(own_m);
      else if (own_m <= sat)
        acc = start_acc + line_slope * (own_m - start);
      else
        acc = model.eval(own_m + others);
      return std::clamp(acc, 0.0, 1.0);
    };
  };
}

inline SpotCheckReport spot_check_data_max(const AccuracyModel& model,
                                           const Population& pop, double epsilon,
                                           int n_alternatives = 16,
                                           const GridSpec& grid = {2000, 2}) {
  if (pop.size() > 3)
    throw std::invalid_argument("spot_check: use at most 3 agents");

  // Reference: the shaping mechanism's own grid equilibrium (through its
  // curves, not through the analytic solvers).
  const CurveFactory shaping = perturbed_shaping_factory(model, pop, epsilon, 0.0, 1.0);
  const std::vector<double> shaping_eq =
      detail::grid_equilibrium(shaping, model, pop, grid);
  SpotCheckReport report;
  for (double m : shaping_eq) report.shaping_total += m;

  const double shift_steps[] = {0.0, 0.5, 1.0, 2.0};
  const double slope_scales[] = {0.7, 0.9, 1.0, 1.25, 2.0};
  for (double shift : shift_steps) {
    for (double scale : slope_scales) {
      if (shift == 0.0 && scale == 1.0) continue;  // the mechanism itself
      if (static_cast<int>(report.entries.size()) >= n_alternatives) break;
      SpotCheckEntry entry;
      entry.name =
          "shift=" + std::to_string(shift) + ",slope_scale=" + std::to_string(scale);

      const CurveFactory factory =
          perturbed_shaping_factory(model, pop, epsilon, shift, scale);
      const std::vector<double> eq =
          detail::grid_equilibrium(factory, model, pop, grid);
      for (double m : eq) entry.total += m;

      // Admissibility: dense scan of each agent's curve against the pooled
      // accuracy (feasibility) and their solo accuracy (IR), with the others'
      // total taken at rescalings of the equilibrium profile.
      for (double f : {0.3, 1.0, 2.0}) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
          const double others = f * others_total(eq, i);
          const auto curve = factory(i, others);
          const double hi = 1.2 / pop.cost(i);
          for (int j = 0; j <= 600; ++j) {
            const double m = hi * j / 600.0;
            const double acc = curve(m);
            if (acc > model.eval(m + others) + 1e-9) entry.feasible = false;
            if (acc < model.eval(m) - 1e-9) entry.ir = false;
          }
        }
      }
      if (entry.feasible && entry.ir) {
        entry.excess = entry.total - report.shaping_total;
        report.worst_excess = std::max(report.worst_excess, entry.excess);
      }
      report.entries.push_back(entry);
    }
    if (static_cast<int>(report.entries.size()) >= n_alternatives) break;
  }
  report.pass = report.worst_excess <= 1e-3;
  return report;
}

// Independent check of the screening menu's expected-data optimality: scan the
// low contract point over its admissible range [saturation_high,
// saturation_low], pair each candidate with the segment intersection the menu
// geometry forces, and return the best expected data found together with the
// expected data of the schedule actually constructed.
struct TwoTypeSpotCheck {
  double schedule_expected{0.0};
  double best_scan_expected{0.0};
  double scan_argmax_down{0.0};
};

inline TwoTypeSpotCheck spot_check_two_type(const AccuracyModel& model,
                                            double c_low, double c_high, double p,
                                            double epsilon, double others,
                                            int scan_points = 2000) {
  const TwoTypeSchedule menu =
      two_type_schedule(model, c_low, c_high, p, epsilon, others);
  TwoTypeSpotCheck res;
  res.schedule_expected =
      (1.0 - p) * menu.contract_high + p * menu.contract_low;

  const double a_high = model.eval(menu.high_optimum);
  const auto up_for = [&](double down) {
    const double raw = (a_high - (c_high + epsilon) * menu.high_optimum -
                        model.eval(down + others) + (c_low + epsilon) * down) /
                       (c_low - c_high);
    return std::clamp(raw, menu.high_optimum, menu.saturation_high);
  };
  if (c_low == c_high || menu.saturation_low <= menu.saturation_high) {
    res.best_scan_expected = res.schedule_expected;
    res.scan_argmax_down = menu.contract_low;
    return res;
  }
  for (int j = 0; j <= scan_points; ++j) {
    const double down = menu.saturation_high +
                        (menu.saturation_low - menu.saturation_high) * j /
                            scan_points;
    const double up = up_for(down);
    const double expected = (1.0 - p) * up + p * down;
    if (expected > res.best_scan_expected) {
      res.best_scan_expected = expected;
      res.scan_argmax_down = down;
    }
  }
  return res;
}

}  // namespace incmech
