// Self-contained verification suite: random-instance property checks for the
// accuracy axioms, optimality of the solo solver, feasibility and IR of every
// mechanism, curve continuity, best-response monotonicity, equilibrium
// certificates and the screening-menu geometry. Each check reports its worst
// violation as a ratio to the check's tolerance, so pass means ratio <= 1.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "incmech/equilibrium.hpp"
#include "json.hpp"

namespace incmech {

struct VerifyCheck {
  std::string name;
  bool pass{true};
  double worst_ratio{0.0};  // worst violation / tolerance
  std::string note;
};

struct VerifyReport {
  bool pass{true};
  bool adversarial{false};
  std::uint64_t seed{42};
  std::vector<VerifyCheck> checks;
};

namespace testgen {

inline AccuracyModel random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> aopt(0.4, 1.0);
  std::uniform_real_distribution<double> logk(0.0, std::log(50.0));
  switch (kind(rng)) {
    case 0:
      return AccuracyModel::simple_bound(aopt(rng), std::exp(logk(rng)));
    case 1:
      return AccuracyModel::full_bound(aopt(rng), std::exp(logk(rng)));
    default: {
      std::uniform_real_distribution<double> beta(0.2, 4.0);
      std::uniform_real_distribution<double> alpha(0.3, 1.0);
      std::uniform_real_distribution<double> tau(0.0, 0.5);
      return AccuracyModel::power_law(beta(rng), alpha(rng), tau(rng));
    }
  }
}

inline double random_cost(std::mt19937_64& rng, double lo = 1e-3, double hi = 0.3) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

inline Population random_population(std::mt19937_64& rng, int max_n = 6) {
  std::uniform_int_distribution<int> nn(1, max_n);
  const int n = nn(rng);
  std::vector<double> costs(n);
  for (double& c : costs) c = random_cost(rng);
  return Population::from_costs(costs);
}

inline std::vector<double> random_profile(std::mt19937_64& rng,
                                          const Population& pop,
                                          double span = 1.0) {
  std::vector<double> m(pop.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < pop.size(); ++i)
    m[i] = span * u(rng) / pop.cost(i);
  return m;
}

}  // namespace testgen

namespace detail {

class CheckRecorder {
 public:
  explicit CheckRecorder(std::string name) { check_.name = std::move(name); }
  // Records a violation measured against the given tolerance.
  void offend(double violation, double tol, const std::string& note = {}) {
    const double ratio = violation / tol;
    if (ratio > check_.worst_ratio) {
      check_.worst_ratio = ratio;
      if (!note.empty()) check_.note = note;
    }
  }
  void fail(const std::string& note) {
    check_.worst_ratio = std::max(check_.worst_ratio, 2.0);
    if (check_.note.empty()) check_.note = note;
  }
  VerifyCheck finish() {
    check_.pass = check_.worst_ratio <= 1.0;
    return check_;
  }

 private:
  VerifyCheck check_;
};

inline MechanismSpec random_mechanism(std::mt19937_64& rng, Population& pop,
                                      double epsilon) {
  std::uniform_int_distribution<int> mk(0, 2);
  switch (mk(rng)) {
    case 0:
      return MechanismSpec::standard();
    case 1:
      return MechanismSpec::shaping_known(epsilon);
    default: {
      pop.has_two_type = true;
      double lo = pop.min_cost(), hi = lo;
      for (const Agent& a : pop.agents) hi = std::max(hi, a.cost);
      pop.two_type.c_low = lo;
      pop.two_type.c_high = hi;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      pop.two_type.p.assign(pop.size(), u(rng));
      for (Agent& a : pop.agents) a.cost = u(rng) < 0.5 ? lo : hi;
      return MechanismSpec::shaping_two_type(epsilon);
    }
  }
}

}  // namespace detail

inline VerifyReport run_verification(std::uint64_t seed = 42,
                                     bool adversarial = false) {
  VerifyReport report;
  report.seed = seed;
  report.adversarial = adversarial;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // --- accuracy axioms -----------------------------------------------------
  {
    detail::CheckRecorder rec("accuracy_axioms");
    for (int t = 0; t < 120; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      const double m0 = model.min_viable_dataset();
      rec.offend(std::abs(model.eval(0.0)), 1e-12, "a(0) != 0");
      rec.offend(model.eval(m0 * (1.0 - 1e-6)), 1e-12, "a > 0 below m0");
      if (!(model.eval(m0 * (1.0 + 1e-6) + 1e-6) > 0.0))
        rec.fail("a = 0 above m0");
      if (model.kind == AccuracyKind::SimpleBound)
        rec.offend(std::abs(model.eval(1e12) - model.limit()), 1e-3,
                   "limit not reached");
      for (int s = 0; s < 12; ++s) {
        const double m1 = m0 * (0.2 + 2.0 * u01(rng));
        const double m2 = m1 + m0 * std::exp(u01(rng) * std::log(1e3)) * u01(rng);
        rec.offend(model.eval(m1) - model.eval(m2), 1e-12, "monotonicity");
        rec.offend(model.eval(m2) - model.limit(), 1e-12, "value above limit");
        // concavity of raw on [m0, inf): midpoint test
        const double a = m0 * (1.0 + u01(rng) * 10.0);
        const double b = a * (1.0 + u01(rng) * 10.0);
        const double mid = 0.5 * (a + b);
        rec.offend(0.5 * (model.raw(a) + model.raw(b)) - model.raw(mid), 1e-10,
                   "concavity");
        // slope vs central finite difference
        const double h = 1e-4 * mid;
        const double fd = (model.raw(mid + h) - model.raw(mid - h)) / (2.0 * h);
        rec.offend(std::abs(model.slope(mid) - fd) / std::max(1e-12, std::abs(fd)),
                   1e-5, "slope vs finite difference");
        // inverse_slope round trip on the decreasing region
        const InverseSlope inv = model.inverse_slope(model.slope(mid));
        if (!inv.finite())
          rec.fail("inverse_slope lost a finite root");
        else
          rec.offend(std::abs(inv.m - mid) / mid, 1e-8, "inverse_slope roundtrip");
      }
    }
    report.checks.push_back(rec.finish());
  }

  // --- solo optimum beats a grid -------------------------------------------
  {
    detail::CheckRecorder rec("individual_optimum_optimality");
    for (int t = 0; t < 150; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      const Agent agent{testgen::random_cost(rng)};
      const double mstar = individual_optimum(model, agent);
      const double ustar = mstar > 0.0 ? utility(model, agent, mstar) : 0.0;
      const double best = detail::grid_argmax(
          [&](double m) { return utility(model, agent, m); },
          contribution_bound(agent.cost), GridSpec{2000, 2});
      rec.offend(utility(model, agent, best) - std::max(0.0, ustar), 1e-6,
                 "grid beat the solo optimum");
      // cost monotonicity
      const Agent pricier{agent.cost * (1.0 + u01(rng))};
      const double m2 = individual_optimum(model, pricier);
      rec.offend(m2 - mstar, 1e-9, "m* not decreasing in cost");
      const double u2 = m2 > 0.0 ? utility(model, pricier, m2) : 0.0;
      rec.offend(u2 - std::max(0.0, ustar), 1e-9, "u* not decreasing in cost");
      // viability threshold split
      const double cmax = viability_threshold(model);
      if (agent.cost > cmax * (1.0 + 1e-6) && mstar > 0.0)
        rec.fail("positive m* above the viability threshold");
      if (mstar > 0.0 && mstar < model.min_viable_dataset())
        rec.fail("m* inside the dead zone");
    }
    report.checks.push_back(rec.finish());
  }

  // --- feasibility and IR for every mechanism -------------------------------
  {
    detail::CheckRecorder rec("feasibility_ir");
    for (int t = 0; t < 300; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      Population pop = testgen::random_population(rng);
      const MechanismSpec mech = detail::random_mechanism(rng, pop, 1e-6);
      std::vector<double> profile = testgen::random_profile(rng, pop, 1.5);
      std::vector<double> acc = allocate(mech, model, pop, profile);
      if (adversarial)
        for (double& a : acc) a += 0.1;
      rec.offend(check_feasible(model, profile, acc).worst_violation, 1e-9,
                 "feasibility");
      rec.offend(check_ir(model, profile, acc).worst_violation, 1e-9, "IR");
    }
    report.checks.push_back(rec.finish());
  }

  // --- allocation continuity at breakpoints ---------------------------------
  {
    detail::CheckRecorder rec("allocation_continuity");
    for (int t = 0; t < 100; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      Population pop = testgen::random_population(rng);
      MechanismSpec mech = u01(rng) < 0.5 ? MechanismSpec::shaping_known(1e-6)
                                          : MechanismSpec::shaping_two_type(1e-6);
      if (mech.kind == MechanismKind::ShapingTwoType) {
        pop.has_two_type = true;
        double lo = pop.min_cost(), hi = lo;
        for (const Agent& a : pop.agents) hi = std::max(hi, a.cost);
        pop.two_type.c_low = lo;
        pop.two_type.c_high = hi;
        pop.two_type.p.assign(pop.size(), u01(rng));
      }
      const std::vector<double> profile = testgen::random_profile(rng, pop);
      for (std::size_t i = 0; i < pop.size(); ++i) {
        const AllocationCurve curve =
            allocation_curve(mech, model, pop, i, others_total(profile, i));
        for (double b : curve.breakpoints()) {
          const double left = curve(std::max(0.0, b - 1e-6));
          const double right = curve(b + 1e-6);
          rec.offend(std::abs(left - right), 1e-4, "jump at a breakpoint");
        }
        // marginal incentive: the middle segment climbs at exactly cost+eps
        const auto& sched = curve.known();
        if (mech.kind == MechanismKind::ShapingKnown &&
            sched.saturation - sched.own_optimum > 1e-2) {
          const double mid = 0.5 * (sched.own_optimum + sched.saturation);
          const double h = 1e-3;
          const double fd = (curve(mid + h) - curve(mid - h)) / (2.0 * h);
          rec.offend(std::abs(fd - (pop.cost(i) + mech.epsilon)), 1e-9,
                     "incentive segment slope");
        }
      }
    }
    report.checks.push_back(rec.finish());
  }

  // --- best-response monotonicity and dominance (random instances) ----------
  // Monotonicity is a property of live incentive segments, so the others'
  // total is drawn past the dead zone; the permitted decrease is the
  // epsilon-order sliver by which the pooled tail can overtake the saturation
  // point, which vanishes with epsilon.
  {
    detail::CheckRecorder rec("best_response_monotonicity");
    const double eps = 1e-6;
    for (int t = 0; t < 100; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      const double cost = testgen::random_cost(rng);
      Population pop = Population::from_costs({cost, cost});
      const MechanismSpec shaping = MechanismSpec::shaping_known(eps);
      const MechanismSpec standard = MechanismSpec::standard();
      const double own = individual_optimum(model, Agent{cost});
      const double base = own > 0.0 ? 0.0 : 1.01 * model.min_viable_dataset();
      const double d1 = base + u01(rng) * 50.0 + 0.1;
      const double d2 = d1 * (1.0 + u01(rng)) + 1.0;
      const double br1 = best_response(shaping, model, pop, 0, {0.0, d1});
      const double br2 = best_response(shaping, model, pop, 0, {0.0, d2});
      const KnownShapingSchedule s1 = known_schedule(model, cost, eps, d1);
      const KnownShapingSchedule s2 = known_schedule(model, cost, eps, d2);
      rec.offend(s1.saturation - s2.saturation, 1e-9,
                 "saturation decreased in others' total");
      const InverseSlope stat = model.inverse_slope(cost);
      const double sliver =
          stat.finite() ? std::max(0.0, stat.m - d1 - s1.saturation) : 0.0;
      rec.offend(br1 - br2 - sliver, 1e-7, "shaping BR decreased in others' total");
      const double br_std = best_response(standard, model, pop, 0, {0.0, d1});
      rec.offend(br_std - br1, 1e-7, "standard BR above shaping BR");
    }
    report.checks.push_back(rec.finish());
  }

  // --- equilibria: free-riding and shaping certificates ----------------------
  {
    detail::CheckRecorder rec("equilibrium_certificates");
    const GridSpec grid{2000, 2};
    for (int t = 0; t < 10; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      Population pop = testgen::random_population(rng, 5);
      // standard: catastrophic free-riding
      ContributionProfile init(pop.size());
      for (std::size_t i = 0; i < pop.size(); ++i)
        init[i] = individual_optimum(model, pop.agents[i]);
      DynamicsOptions opts;
      opts.certify = true;
      opts.grid = grid;
      const EquilibriumResult res = best_response_dynamics(
          MechanismSpec::standard(), model, pop, init, opts);
      if (!res.converged) rec.fail("standard dynamics did not converge");
      rec.offend(res.nash_regret, 1e-4, "standard regret");
      std::size_t cheapest = 0;
      for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop.cost(i) < pop.cost(cheapest)) cheapest = i;
      const double mfed = individual_optimum(model, pop.agents[cheapest]);
      rec.offend(std::abs(res.profile[cheapest] - mfed), 1e-5 * (1.0 + mfed),
                 "cheapest agent off its solo optimum");
      for (std::size_t i = 0; i < pop.size(); ++i)
        if (i != cheapest)
          rec.offend(res.profile[i], 1e-5, "free rider still contributing");

      // shaping: everyone at or above their solo optimum, utilities preserved
      const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
      try {
        const ContributionProfile eq = closed_form_equilibrium(shaping, model, pop);
        const std::vector<double> acc = allocate(shaping, model, pop, eq);
        rec.offend(certify_nash(shaping, model, pop, eq, grid), 1e-4,
                   "shaping regret");
        for (std::size_t i = 0; i < pop.size(); ++i) {
          const double mstar = individual_optimum(model, pop.agents[i]);
          rec.offend(mstar - eq[i], 1e-9, "equilibrium below solo optimum");
          const double u_eq = acc[i] - pop.cost(i) * eq[i];
          const double u_solo = std::max(0.0, utility(model, pop.agents[i], mstar));
          rec.offend(std::abs(u_eq - u_solo), 1e-6 * eq[i] + 1e-6,
                     "utility changed by shaping");
        }
      } catch (const FixedPointError&) {
        rec.fail("shaping equilibrium did not converge");
      }
    }
    report.checks.push_back(rec.finish());
  }

  // --- two-type schedule geometry -------------------------------------------
  {
    detail::CheckRecorder rec("two_type_schedule");
    for (int t = 0; t < 40; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      const double cmax = viability_threshold(model);
      if (cmax <= 0.0) continue;
      const double c_high = cmax * (0.1 + 0.8 * u01(rng));
      const double c_low = c_high * (0.2 + 0.7 * u01(rng));
      const double p = u01(rng);
      const double eps = 1e-9;
      const double low_opt = individual_optimum(model, Agent{c_low});
      const double others = low_opt * (2.0 + 8.0 * u01(rng));
      const TwoTypeSchedule menu =
          two_type_schedule(model, c_low, c_high, p, eps, others);
      rec.offend(menu.high_optimum - menu.contract_high, 1e-9, "m_up below m*");
      rec.offend(menu.contract_high - menu.contract_low, 1e-9, "m_up above m_down");
      rec.offend(menu.contract_low - menu.saturation_low, 1e-9,
                 "m_down above low saturation");
      rec.offend(menu.saturation_high - menu.contract_low, 1e-9,
                 "m_down below high saturation");
      if (p >= c_low / (c_low + c_high) + 1e-9)
        rec.offend(std::abs(menu.contract_low - menu.saturation_low), 1e-9,
                   "clamp to low saturation did not fire");
      // intersection residual of the two segments
      const double lhs = model.eval(menu.contract_low + others) -
                         (c_low + eps) * (menu.contract_low - menu.contract_high);
      const double rhs =
          model.eval(menu.high_optimum) +
          (c_high + eps) * (menu.contract_high - menu.high_optimum);
      rec.offend(std::abs(lhs - rhs), 1e-8, "segment intersection residual");
      // screening: a low-cost agent weakly prefers its own contract point
      const AllocationCurve curve = AllocationCurve::shaping_two_type(
          model, c_low, c_high, p, eps, others);
      const double u_down = curve(menu.contract_low) - c_low * menu.contract_low;
      const double u_up = curve(menu.contract_high) - c_low * menu.contract_high;
      rec.offend(u_up - u_down, 1e-12, "low type prefers the high contract");
      // expected-data scan: the schedule stays inside the enumerated menu
      // family, and wherever the saturation clamp is provably optimal
      // (p >= c_low/c_high) the scan agrees with it
      const TwoTypeSpotCheck scan =
          spot_check_two_type(model, c_low, c_high, p, eps, others, 800);
      rec.offend(scan.schedule_expected - scan.best_scan_expected, 1e-9,
                 "schedule outside the scanned menu family");
      if (p >= 1.05 * c_low / c_high)
        rec.offend(scan.best_scan_expected - scan.schedule_expected,
                   1e-3 * (1.0 + scan.best_scan_expected),
                   "scan beat the saturation clamp where it is optimal");
    }
    report.checks.push_back(rec.finish());
  }

  // --- enumerated-alternatives data maximization -----------------------------
  {
    detail::CheckRecorder rec("data_max_spot_check");
    const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
    const Population pop = Population::from_costs({0.01, 0.02});
    const SpotCheckReport spot = spot_check_data_max(model, pop, 1e-6, 19);
    rec.offend(spot.worst_excess, 1e-3, "an alternative beat shaping");
    report.checks.push_back(rec.finish());
  }

  // --- shared-cost viability root --------------------------------------------
  {
    detail::CheckRecorder rec("min_viability_root");
    for (int t = 0; t < 30; ++t) {
      const AccuracyModel model = testgen::random_model(rng);
      const double c = testgen::random_cost(rng, 1e-2, 1.0);
      const int n = 1 + static_cast<int>(u01(rng) * 200);
      const double root = min_viability_total(model, c, n);
      if (root > 0.0)
        rec.offend(std::abs(model.eval(root) - c / n * root), 1e-8,
                   "root residual");
    }
    report.checks.push_back(rec.finish());
  }

  for (const VerifyCheck& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

inline nlohmann::json to_json(const VerifyReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const VerifyCheck& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"worst_ratio", c.worst_ratio},
                      {"note", c.note}});
  return {{"pass", report.pass},
          {"adversarial", report.adversarial},
          {"seed", report.seed},
          {"checks", checks}};
}

}  // namespace incmech
