// Agents with linear data-generation costs, their utilities and the optimal
// solo contribution: collect until the marginal accuracy equals the marginal
// cost, or nothing when the problem is never profitable.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "incmech/accuracy.hpp"

namespace incmech {

struct Agent {
  double cost{0.1};  // marginal cost per data point, > 0

  void validate() const {
    if (!(cost > 0.0) || !std::isfinite(cost))
      throw std::invalid_argument("agent: cost must be positive and finite");
  }
};

// Low/high cost pair with per-agent priors for the screening mechanism;
// p[i] is the probability that agent i realizes the low cost.
struct TwoTypeSpec {
  double c_low{0.0};
  double c_high{0.0};
  std::vector<double> p;

  void validate(std::size_t n) const {
    if (!(c_low > 0.0) || !(c_high > 0.0) || !(c_low <= c_high))
      throw std::invalid_argument("two_type: need 0 < c_low <= c_high");
    if (p.size() != n)
      throw std::invalid_argument("two_type: one prior per agent required");
    for (double pi : p)
      if (!(pi >= 0.0) || !(pi <= 1.0))
        throw std::invalid_argument("two_type: priors must lie in [0, 1]");
  }
};

struct Population {
  std::vector<Agent> agents;
  bool has_two_type{false};
  TwoTypeSpec two_type;

  std::size_t size() const { return agents.size(); }
  double cost(std::size_t i) const { return agents[i].cost; }

  double min_cost() const {
    double c = agents.front().cost;
    for (const Agent& a : agents) c = std::min(c, a.cost);
    return c;
  }

  void validate() const {
    if (agents.empty()) throw std::invalid_argument("population: need n >= 1");
    for (const Agent& a : agents) a.validate();
    if (has_two_type) two_type.validate(agents.size());
  }

  static Population from_costs(std::vector<double> costs) {
    Population pop;
    pop.agents.reserve(costs.size());
    for (double c : costs) pop.agents.push_back(Agent{c});
    pop.validate();
    return pop;
  }
};

// u(m) = a(m) - c m.
inline double utility(const AccuracyModel& model, const Agent& agent, double m) {
  return model.eval(m) - agent.cost * m;
}

// Optimal solo contribution m*: the stationary point b'(m*) = c when the
// resulting utility is positive, 0 otherwise (ties at zero utility collect
// nothing). The stationary point, when returned, lies beyond the minimum
// viable dataset.
inline double individual_optimum(const AccuracyModel& model, const Agent& agent) {
  const InverseSlope stat = model.inverse_slope(agent.cost);
  if (!stat.finite()) return 0.0;
  if (!(utility(model, agent, stat.m) > 0.0)) return 0.0;
  return stat.m;
}

// Largest cost at which the solo problem is viable: the root in c of
// u(m*(c)) = 0, found by bisection. individual_optimum is positive strictly
// below the threshold and zero above it.
inline double viability_threshold(const AccuracyModel& model) {
  const auto best_utility = [&](double c) {
    const InverseSlope stat = model.inverse_slope(c);
    if (!stat.finite()) return -1.0;
    return model.eval(stat.m) - c * stat.m;
  };
  double lo = 1e-12;
  if (!(best_utility(lo) > 0.0)) return 0.0;
  double hi = expand_up(2.0 * lo, [&](double c) { return best_utility(c) <= 0.0; });
  return bisect(best_utility, lo, hi);
}

}  // namespace incmech
