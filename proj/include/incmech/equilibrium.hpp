// Nash equilibria of the data-sharing game: per-agent best responses against
// each mechanism's piecewise allocation curve, synchronous damped
// best-response dynamics, and the equilibria the theory pins down directly
// (lowest-cost free-riding under the standard mechanism, the saturation fixed
// point under shaping, the contract points under two-type screening).
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incmech/mechanisms.hpp"
#include "incmech/oracle.hpp"
#include "json.hpp"

namespace incmech {

using ContributionProfile = std::vector<double>;

// Contributions above 1/c are dominated: accuracies cap at 1, so the utility
// is negative there. All search is confined to [0, 1/c].
inline double contribution_bound(double cost) { return 1.0 / cost; }

struct EquilibriumResult {
  ContributionProfile profile;
  std::vector<double> accuracies;
  std::vector<double> utilities;
  bool converged{false};
  int iterations{0};
  double nash_regret{std::numeric_limits<double>::quiet_NaN()};

  double total() const {
    double t = 0.0;
    for (double m : profile) t += m;
    return t;
  }
};

struct FixedPointError : std::runtime_error {
  ContributionProfile last_iterate;
  FixedPointError(const std::string& msg, ContributionProfile iterate)
      : std::runtime_error(msg), last_iterate(std::move(iterate)) {}
};

// Exact maximizer of agent i's utility over their own contribution, the rest
// of the profile held fixed. The utility curve has at most two local maxima
// (zero, and the maximum of the concave branch), and every breakpoint of the
// allocation curve is a candidate; the concave-tail stationary point comes
// from inverting the marginal accuracy at the agent's cost. Ties break toward
// the larger contribution.
inline double best_response(const MechanismSpec& mech, const AccuracyModel& model,
                            const Population& pop, std::size_t i,
                            const ContributionProfile& profile) {
  const double cost = pop.cost(i);
  const double ub = contribution_bound(cost);
  const double others = others_total(profile, i);
  const AllocationCurve curve = allocation_curve(mech, model, pop, i, others);

  std::vector<double> candidates{0.0};
  double tail_start = 0.0;
  for (double b : curve.breakpoints()) {
    candidates.push_back(std::clamp(b, 0.0, ub));
    tail_start = std::max(tail_start, b);
  }
  const InverseSlope stat = model.inverse_slope(cost);
  if (stat.finite())
    candidates.push_back(std::clamp(stat.m - others, tail_start, ub));

  double best_m = 0.0;
  double best_u = curve(0.0);
  for (double m : candidates) {
    const double u = curve(m) - cost * m;
    if (u > best_u || (u == best_u && m > best_m)) {
      best_u = u;
      best_m = m;
    }
  }
  return best_m;
}

struct DynamicsOptions {
  double tol{1e-8};
  int max_iter{10000};
  double damping{0.5};  // weight on the fresh best response
  bool certify{true};   // grid-certify the Nash regret of the result
  GridSpec grid{};
};

// Synchronous (Jacobi) best-response iteration with damping. Non-convergence
// is reported through converged = false, never hidden.
inline EquilibriumResult best_response_dynamics(const MechanismSpec& mech,
                                                const AccuracyModel& model,
                                                const Population& pop,
                                                ContributionProfile init,
                                                const DynamicsOptions& opts = {}) {
  if (init.size() != pop.size())
    throw std::invalid_argument("dynamics: init size must match population");
  EquilibriumResult result;
  ContributionProfile cur = std::move(init);
  for (int it = 1; it <= opts.max_iter; ++it) {
    ContributionProfile next(cur.size());
    double change = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double br = best_response(mech, model, pop, i, cur);
      next[i] = (1.0 - opts.damping) * cur[i] + opts.damping * br;
      change = std::max(change, std::abs(next[i] - cur[i]));
    }
    cur = std::move(next);
    result.iterations = it;
    if (change < opts.tol) {
      result.converged = true;
      break;
    }
  }
  result.profile = std::move(cur);
  result.accuracies = allocate(mech, model, pop, result.profile);
  result.utilities.resize(result.profile.size());
  for (std::size_t i = 0; i < result.profile.size(); ++i)
    result.utilities[i] =
        result.accuracies[i] - pop.cost(i) * result.profile[i];
  if (opts.certify)
    result.nash_regret = certify_nash(mech, model, pop, result.profile, opts.grid);
  return result;
}

// Largest positive root of (c/n) m = a(m): the total dataset at which n
// agents sharing cost c break even. Returns 0 when the cost line stays above
// the accuracy curve everywhere (the problem cannot be crowd-funded at this n).
inline double min_viability_total(const AccuracyModel& model, double cost, int n) {
  if (n < 1 || !(cost > 0.0))
    throw std::invalid_argument("min_viability_total: need n >= 1 and cost > 0");
  const double shared = cost / n;
  const InverseSlope stat = model.inverse_slope(shared);
  if (!stat.finite()) return 0.0;
  const auto f = [&](double m) { return model.eval(m) - shared * m; };
  const double peak = stat.m;
  if (!(f(peak) > 0.0)) return 0.0;
  double lo = peak;
  double hi = std::max(2.0 * peak, peak + 1.0);
  while (f(hi) > 0.0 && hi < 1e300) {
    lo = hi;
    hi *= 2.0;
  }
  return bisect(f, lo, hi);
}

namespace detail {

// Common contribution of n identical shaping agents: damped fixed point of
// m -> saturation(c, m*, (n-1) m). When the solo optimum is zero the iteration
// is seeded from the shared-cost viability root, selecting the positive
// equilibrium whenever one exists.
inline double symmetric_shaping_contribution(const AccuracyModel& model,
                                             double cost, double epsilon, int n,
                                             double tol = 1e-8,
                                             int max_iter = 10000) {
  const double own = individual_optimum(model, Agent{cost});
  double m = own;
  if (m <= 0.0) {
    const double total = min_viability_total(model, cost, n);
    if (total <= 0.0) return 0.0;
    m = total / n;
  }
  for (int it = 0; it < max_iter; ++it) {
    const double target =
        solve_max_contribution(model, cost, epsilon, own, (n - 1) * m);
    const double next = 0.5 * m + 0.5 * target;
    const double change = std::abs(next - m);
    m = next;
    if (change < tol) return m;
  }
  throw FixedPointError("symmetric shaping fixed point did not converge",
                        ContributionProfile(1, m));
}

inline bool all_costs_equal(const Population& pop) {
  for (const Agent& a : pop.agents)
    if (a.cost != pop.agents.front().cost) return false;
  return true;
}

}  // namespace detail

// Fixed point of a two-type population that is symmetric within each realized
// type: n_high agents hold the high contract point and n_low the low one,
// all sharing the prior p. Returns {contribution_high, contribution_low}.
// Scales to arbitrary n since each iteration solves just two schedules.
inline std::pair<double, double> two_type_symmetric_equilibrium(
    const AccuracyModel& model, double c_low, double c_high, double p,
    double epsilon, int n_high, int n_low, double tol = 1e-8,
    int max_iter = 10000) {
  if (n_high < 0 || n_low < 0 || n_high + n_low < 1)
    throw std::invalid_argument("two_type_symmetric_equilibrium: bad counts");
  const int n = n_high + n_low;
  double xh = n_high > 0 ? individual_optimum(model, Agent{c_high}) : 0.0;
  double xl = n_low > 0 ? individual_optimum(model, Agent{c_low}) : 0.0;
  if (xh <= 0.0 && xl <= 0.0) {
    const double seed_total = min_viability_total(model, c_low, n);
    if (seed_total <= 0.0) return {0.0, 0.0};
    xh = n_high > 0 ? seed_total / n : 0.0;
    xl = n_low > 0 ? seed_total / n : 0.0;
  }
  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    double next_h = xh, next_l = xl;
    if (n_high > 0) {
      const double others = (n_high - 1) * xh + n_low * xl;
      const TwoTypeSchedule menu =
          two_type_schedule(model, c_low, c_high, p, epsilon, others);
      next_h = 0.5 * xh + 0.5 * menu.contract_high;
      change = std::max(change, std::abs(next_h - xh));
    }
    if (n_low > 0) {
      const double others = n_high * xh + (n_low - 1) * xl;
      const TwoTypeSchedule menu =
          two_type_schedule(model, c_low, c_high, p, epsilon, others);
      next_l = 0.5 * xl + 0.5 * menu.contract_low;
      change = std::max(change, std::abs(next_l - xl));
    }
    xh = next_h;
    xl = next_l;
    if (change < tol) return {xh, xl};
  }
  throw FixedPointError("two-type symmetric fixed point did not converge",
                        {xh, xl});
}

// The equilibrium each mechanism's theory singles out.
//
//   StandardFederated - only the cheapest agent (lowest index on ties)
//                       contributes, at its solo optimum.
//   ShapingKnown      - joint fixed point of the saturation points, reached by
//                       damped iteration from the solo optima (or from the
//                       shared-viability seed when those are all zero).
//   ShapingTwoType    - joint fixed point of the contract points selected by
//                       each agent's realized cost.
//
// Results are self-checked against best_response; non-convergence raises
// FixedPointError carrying the last iterate.
namespace detail {

// Nash self-check: no agent may gain more than tol by deviating to their
// analytic best response. Checks every agent for small populations, a
// representative one for large symmetric sweeps.
inline void nash_self_check(const MechanismSpec& mech, const AccuracyModel& model,
                            const Population& pop, const ContributionProfile& cur,
                            double tol = 1e-5) {
  const std::size_t checked = pop.size() <= 32 ? pop.size() : 1;
  for (std::size_t i = 0; i < checked; ++i) {
    const AllocationCurve curve =
        allocation_curve(mech, model, pop, i, others_total(cur, i));
    const double br = best_response(mech, model, pop, i, cur);
    const double gain = (curve(br) - pop.cost(i) * br) -
                        (curve(cur[i]) - pop.cost(i) * cur[i]);
    if (gain > tol)
      throw FixedPointError(
          "closed_form_equilibrium: fixed point fails the Nash self-check", cur);
  }
}

}  // namespace detail

inline ContributionProfile closed_form_equilibrium(const MechanismSpec& mech,
                                                   const AccuracyModel& model,
                                                   const Population& pop) {
  const std::size_t n = pop.size();
  if (mech.kind == MechanismKind::StandardFederated) {
    std::size_t cheapest = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (pop.cost(i) < pop.cost(cheapest)) cheapest = i;
    ContributionProfile profile(n, 0.0);
    profile[cheapest] = individual_optimum(model, pop.agents[cheapest]);
    return profile;
  }

  if (mech.kind == MechanismKind::ShapingKnown && detail::all_costs_equal(pop)) {
    const double m = detail::symmetric_shaping_contribution(
        model, pop.cost(0), mech.epsilon, static_cast<int>(n));
    ContributionProfile profile(n, m);
    detail::nash_self_check(mech, model, pop, profile);
    return profile;
  }

  // General damped fixed point over the per-agent targets.
  const auto target = [&](std::size_t i, double others) {
    if (mech.kind == MechanismKind::ShapingKnown) {
      const KnownShapingSchedule s =
          known_schedule(model, pop.cost(i), mech.epsilon, others);
      return s.saturation;
    }
    const TwoTypeSchedule menu =
        two_type_schedule(model, pop.two_type.c_low, pop.two_type.c_high,
                          pop.two_type.p[i], mech.epsilon, others);
    const double c = pop.cost(i);
    if (c == pop.two_type.c_high) return menu.contract_high;
    if (c == pop.two_type.c_low) return menu.contract_low;
    throw std::invalid_argument(
        "closed_form_equilibrium: agent cost matches neither declared type");
  };

  ContributionProfile cur(n);
  double solo_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cur[i] = individual_optimum(model, pop.agents[i]);
    solo_total += cur[i];
  }
  if (solo_total <= 0.0) {
    const double seed = min_viability_total(model, pop.min_cost(), static_cast<int>(n));
    for (double& m : cur) m = seed / static_cast<double>(n);
  }

  const double tol = 1e-8;
  const int max_iter = 10000;
  bool converged = false;
  for (int it = 0; it < max_iter && !converged; ++it) {
    double change = 0.0;
    ContributionProfile next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = 0.5 * cur[i] + 0.5 * target(i, others_total(cur, i));
      change = std::max(change, std::abs(next[i] - cur[i]));
    }
    cur = std::move(next);
    converged = change < tol;
  }
  if (!converged)
    throw FixedPointError("closed_form_equilibrium: fixed point did not converge",
                          cur);
  detail::nash_self_check(mech, model, pop, cur);
  return cur;
}

inline nlohmann::json to_json(const EquilibriumResult& r) {
  return nlohmann::json{{"profile", r.profile},
                        {"accuracies", r.accuracies},
                        {"utilities", r.utilities},
                        {"nash_regret", r.nash_regret},
                        {"iterations", r.iterations},
                        {"converged", r.converged}};
}

}  // namespace incmech
