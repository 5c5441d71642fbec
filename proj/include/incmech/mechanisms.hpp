// Allocation rules mapping contribution profiles to per-agent accuracies.
//
// StandardFederated returns the pooled-data accuracy to everyone. The two
// shaping mechanisms bend each agent's curve so that past their solo optimum
// every extra data point buys strictly more accuracy than it costs, up to the
// point where the incentive line meets the pooled curve. The two-type variant
// screens unknown costs with a two-segment menu: a high-cost segment ending at
// contract_high and a low-cost segment ending on the pooled curve at
// contract_low.
//
// Schedules are rebuilt from the others' realized total for every profile
// evaluated, so the curves are well defined (and feasible and individually
// rational) for arbitrary non-negative profiles, not just equilibrium ones.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmech/accuracy.hpp"
#include "incmech/agents.hpp"

namespace incmech {

enum class MechanismKind { StandardFederated, ShapingKnown, ShapingTwoType };

struct MechanismSpec {
  MechanismKind kind{MechanismKind::StandardFederated};
  double epsilon{1e-6};  // marginal-incentive margin over the agent's cost

  static MechanismSpec standard() { return {MechanismKind::StandardFederated, 1e-6}; }
  static MechanismSpec shaping_known(double epsilon = 1e-6) {
    MechanismSpec m{MechanismKind::ShapingKnown, epsilon};
    m.validate();
    return m;
  }
  static MechanismSpec shaping_two_type(double epsilon = 1e-6) {
    MechanismSpec m{MechanismKind::ShapingTwoType, epsilon};
    m.validate();
    return m;
  }

  void validate() const {
    if (kind != MechanismKind::StandardFederated && !(epsilon > 0.0))
      throw std::invalid_argument("mechanism: epsilon must be > 0");
  }
};

// Returns a human-readable warning when epsilon is not small relative to the
// population's costs, empty otherwise.
inline std::string epsilon_warning(const MechanismSpec& mech, const Population& pop) {
  if (mech.kind == MechanismKind::StandardFederated) return {};
  const double floor = 0.01 * pop.min_cost();
  if (mech.epsilon > floor)
    return "mechanism: epsilon " + std::to_string(mech.epsilon) +
           " exceeds 1% of the smallest cost; incentive segments will distort utilities";
  return {};
}

// Largest m >= own_opt where the incentive line through (own_opt, a(own_opt))
// with slope cost+epsilon meets the pooled curve a(m + others_total). When the
// pooled curve does not lie strictly above the line just past own_opt (no free
// data from others, or their total still inside the dead zone), the line never
// opens up and own_opt itself is returned.
inline double solve_max_contribution(const AccuracyModel& model, double cost,
                                     double epsilon, double own_opt,
                                     double others_total) {
  if (!(others_total > 0.0)) return own_opt;
  const double anchor_acc = model.eval(own_opt);
  if (!(model.eval(own_opt + others_total) > anchor_acc)) return own_opt;
  const double s = cost + epsilon;
  const auto gap = [&](double m) {
    return model.eval(m + others_total) - anchor_acc - s * (m - own_opt);
  };
  double lo = own_opt;
  double hi = std::max(2.0 * own_opt, own_opt + 1.0);
  while (gap(hi) > 0.0 && hi < 1e300) {
    lo = hi;
    hi *= 2.0;
  }
  return bisect(gap, lo, hi);
}

struct KnownShapingSchedule {
  double own_optimum{0.0};  // solo optimum; the incentive line starts here
  double saturation{0.0};   // where the line meets the pooled curve
  double others_total{0.0};
};

inline KnownShapingSchedule known_schedule(const AccuracyModel& model, double cost,
                                           double epsilon, double others_total) {
  KnownShapingSchedule s;
  s.own_optimum = individual_optimum(model, Agent{cost});
  s.others_total = others_total;
  s.saturation =
      solve_max_contribution(model, cost, epsilon, s.own_optimum, others_total);
  return s;
}

struct TwoTypeSchedule {
  double high_optimum{0.0};     // solo optimum of the high-cost type
  double contract_high{0.0};    // end of the high-cost incentive segment
  double contract_low{0.0};     // where the low-cost segment meets the pooled curve
  double saturation_high{0.0};  // known-costs saturation for the high type
  double saturation_low{0.0};   // known-costs saturation for the low type
  double others_total{0.0};
};

// Builds the screening menu. contract_low comes from the expected-data
// first-order condition b'(contract_low + others) = c_low - p/(1-p) c_high,
// clamped into [saturation_high, saturation_low]; a prior p = 1 (or any prior
// making the target non-positive) drives the target slope through the
// no-finite-root sentinel so the clamp picks saturation_low without special
// cases. contract_high is the intersection of the two linear segments. When
// the intersection lands beyond saturation_high the pooled surplus is too
// small to screen and both contract points collapse onto saturation_high.
inline TwoTypeSchedule two_type_schedule(const AccuracyModel& model, double c_low,
                                         double c_high, double p, double epsilon,
                                         double others_total) {
  if (!(c_low > 0.0) || !(c_high > 0.0) || !(c_low <= c_high))
    throw std::invalid_argument("two_type_schedule: need 0 < c_low <= c_high");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("two_type_schedule: prior must lie in [0, 1]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("two_type_schedule: epsilon must be > 0");

  TwoTypeSchedule sched;
  sched.others_total = others_total;
  sched.high_optimum = individual_optimum(model, Agent{c_high});
  const double low_optimum = individual_optimum(model, Agent{c_low});
  sched.saturation_high = solve_max_contribution(model, c_high, epsilon,
                                                 sched.high_optimum, others_total);
  sched.saturation_low =
      solve_max_contribution(model, c_low, epsilon, low_optimum, others_total);

  if (c_low == c_high) {
    sched.contract_high = sched.saturation_high;
    sched.contract_low = sched.saturation_high;
    return sched;
  }

  InverseSlope target = InverseSlope::no_finite_root();
  if (p < 1.0) target = model.inverse_slope(c_low - p / (1.0 - p) * c_high);
  double down = sched.saturation_low;
  if (target.finite())
    down = std::clamp(target.m - others_total, sched.saturation_high,
                      sched.saturation_low);

  const double up_raw =
      (model.eval(sched.high_optimum) - (c_high + epsilon) * sched.high_optimum -
       model.eval(down + others_total) + (c_low + epsilon) * down) /
      (c_low - c_high);

  if (!(up_raw <= sched.saturation_high)) {
    sched.contract_high = sched.saturation_high;
    sched.contract_low = sched.saturation_high;
  } else {
    sched.contract_low = down;
    sched.contract_high = std::clamp(up_raw, sched.high_optimum, down);
  }
  return sched;
}

// One agent's accuracy as a function of their own contribution, with the
// others' total fixed. This is the mechanism's allocation rule restricted to
// one coordinate; allocate() evaluates it at the profile point.
class AllocationCurve {
 public:
  static AllocationCurve standard(const AccuracyModel& model, double others_total) {
    AllocationCurve c(MechanismKind::StandardFederated, model, 0.0, others_total);
    return c;
  }
  static AllocationCurve shaping_known(const AccuracyModel& model, double cost,
                                       double epsilon, double others_total) {
    AllocationCurve c(MechanismKind::ShapingKnown, model, epsilon, others_total);
    c.cost_ = cost;
    c.known_ = known_schedule(model, cost, epsilon, others_total);
    return c;
  }
  static AllocationCurve shaping_two_type(const AccuracyModel& model, double c_low,
                                          double c_high, double p, double epsilon,
                                          double others_total) {
    AllocationCurve c(MechanismKind::ShapingTwoType, model, epsilon, others_total);
    c.c_low_ = c_low;
    c.c_high_ = c_high;
    c.menu_ = two_type_schedule(model, c_low, c_high, p, epsilon, others_total);
    return c;
  }

  double operator()(double own_m) const {
    if (!(own_m >= 0.0))
      throw std::invalid_argument("allocation: contributions must be >= 0");
    double acc = 0.0;
    switch (kind_) {
      case MechanismKind::StandardFederated:
        acc = model_.eval(own_m + others_total_);
        break;
      case MechanismKind::ShapingKnown:
        if (own_m <= known_.own_optimum) {
          acc = model_.eval(own_m);
        } else if (own_m <= known_.saturation) {
          acc = model_.eval(known_.own_optimum) +
                (cost_ + eps_) * (own_m - known_.own_optimum);
        } else {
          acc = model_.eval(own_m + others_total_);
        }
        break;
      case MechanismKind::ShapingTwoType:
        if (own_m <= menu_.high_optimum) {
          acc = model_.eval(own_m);
        } else if (own_m <= menu_.contract_high) {
          acc = model_.eval(menu_.high_optimum) +
                (c_high_ + eps_) * (own_m - menu_.high_optimum);
        } else if (own_m <= menu_.contract_low) {
          acc = model_.eval(menu_.contract_low + others_total_) -
                (c_low_ + eps_) * (menu_.contract_low - own_m);
        } else {
          acc = model_.eval(own_m + others_total_);
        }
        break;
    }
    return std::clamp(acc, 0.0, 1.0);
  }

  // 0-based piece of the case analysis above that own_m falls in.
  int piece_index(double own_m) const {
    switch (kind_) {
      case MechanismKind::StandardFederated:
        return 0;
      case MechanismKind::ShapingKnown:
        if (own_m <= known_.own_optimum) return 0;
        if (own_m <= known_.saturation) return 1;
        return 2;
      case MechanismKind::ShapingTwoType:
        if (own_m <= menu_.high_optimum) return 0;
        if (own_m <= menu_.contract_high) return 1;
        if (own_m <= menu_.contract_low) return 2;
        return 3;
    }
    return 0;
  }

  std::vector<double> breakpoints() const {
    switch (kind_) {
      case MechanismKind::StandardFederated:
        return {};
      case MechanismKind::ShapingKnown:
        return {known_.own_optimum, known_.saturation};
      case MechanismKind::ShapingTwoType:
        return {menu_.high_optimum, menu_.contract_high, menu_.contract_low};
    }
    return {};
  }

  const KnownShapingSchedule& known() const { return known_; }
  const TwoTypeSchedule& menu() const { return menu_; }
  double others_total() const { return others_total_; }

 private:
  AllocationCurve(MechanismKind kind, const AccuracyModel& model, double eps,
                  double others_total)
      : kind_(kind), model_(model), eps_(eps), others_total_(others_total) {}

  MechanismKind kind_;
  AccuracyModel model_;
  double eps_;
  double others_total_;
  double cost_{0.0};
  double c_low_{0.0}, c_high_{0.0};
  KnownShapingSchedule known_{};
  TwoTypeSchedule menu_{};
};

inline AllocationCurve allocation_curve(const MechanismSpec& mech,
                                        const AccuracyModel& model,
                                        const Population& pop, std::size_t i,
                                        double others_total) {
  switch (mech.kind) {
    case MechanismKind::StandardFederated:
      return AllocationCurve::standard(model, others_total);
    case MechanismKind::ShapingKnown:
      return AllocationCurve::shaping_known(model, pop.cost(i), mech.epsilon,
                                            others_total);
    case MechanismKind::ShapingTwoType: {
      if (!pop.has_two_type)
        throw std::invalid_argument(
            "allocate: ShapingTwoType requires a two-type population section");
      return AllocationCurve::shaping_two_type(model, pop.two_type.c_low,
                                               pop.two_type.c_high,
                                               pop.two_type.p[i], mech.epsilon,
                                               others_total);
    }
  }
  throw std::logic_error("allocate: unknown mechanism kind");
}

inline double others_total(const std::vector<double>& profile, std::size_t i) {
  double total = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j)
    if (j != i) total += profile[j];
  return total;
}

inline std::vector<double> allocate(const MechanismSpec& mech,
                                    const AccuracyModel& model,
                                    const Population& pop,
                                    const std::vector<double>& profile) {
  if (profile.size() != pop.size())
    throw std::invalid_argument("allocate: profile size must match population");
  double total = 0.0;
  for (double m : profile) {
    if (!(m >= 0.0))
      throw std::invalid_argument("allocate: contributions must be >= 0");
    total += m;
  }
  std::vector<double> acc(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i)
    acc[i] = allocation_curve(mech, model, pop, i, total - profile[i])(profile[i]);
  return acc;
}

struct CheckResult {
  bool ok{true};
  double worst_violation{0.0};
};

// Feasibility (never allocate above the pooled-data accuracy), checked on a
// precomputed allocation so deliberately broken rules can be fed in directly.
inline CheckResult check_feasible(const AccuracyModel& model,
                                  const std::vector<double>& profile,
                                  const std::vector<double>& accuracies) {
  double total = 0.0;
  for (double m : profile) total += m;
  const double pooled = model.eval(total);
  CheckResult r;
  for (double a : accuracies)
    r.worst_violation = std::max(r.worst_violation, a - pooled);
  r.ok = r.worst_violation <= 1e-9;
  r.worst_violation = std::max(0.0, r.worst_violation);
  return r;
}

inline CheckResult check_feasible(const MechanismSpec& mech,
                                  const AccuracyModel& model,
                                  const Population& pop,
                                  const std::vector<double>& profile) {
  return check_feasible(model, profile, allocate(mech, model, pop, profile));
}

// Individual rationality: participation never returns less accuracy than the
// agent's own data would have produced.
inline CheckResult check_ir(const AccuracyModel& model,
                            const std::vector<double>& profile,
                            const std::vector<double>& accuracies) {
  CheckResult r;
  for (std::size_t i = 0; i < profile.size(); ++i)
    r.worst_violation =
        std::max(r.worst_violation, model.eval(profile[i]) - accuracies[i]);
  r.ok = r.worst_violation <= 1e-9;
  r.worst_violation = std::max(0.0, r.worst_violation);
  return r;
}

inline CheckResult check_ir(const MechanismSpec& mech, const AccuracyModel& model,
                            const Population& pop,
                            const std::vector<double>& profile) {
  return check_ir(model, profile, allocate(mech, model, pop, profile));
}

inline const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::StandardFederated: return "standard";
    case MechanismKind::ShapingKnown: return "shaping";
    case MechanismKind::ShapingTwoType: return "shaping2t";
  }
  return "?";
}

}  // namespace incmech
