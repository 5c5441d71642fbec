#include <cmath>
#include <random>

#include "doctest.h"
#include "incmech/equilibrium.hpp"
#include "incmech/oracle.hpp"
#include "incmech/verify.hpp"

using namespace incmech;

TEST_CASE("grid best response recovers the solo optimum for a lone agent") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01});
  const GridSpec grid{10000, 2};
  const double gbr =
      grid_best_response(MechanismSpec::standard(), model, pop, 0, {0.0}, grid);
  CHECK(std::abs(gbr - 21.5443469) <= 2.0 * grid.resolution(0.01));

  const Population pricey = Population::from_costs({5.0});
  CHECK(grid_best_response(MechanismSpec::standard(), model, pricey, 0, {0.0},
                           grid) == 0.0);
}

TEST_CASE("nash certification") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.02, 0.05});
  const MechanismSpec standard = MechanismSpec::standard();
  const GridSpec grid{4000, 2};

  // the free-riding profile is a certified equilibrium
  const ContributionProfile eq = closed_form_equilibrium(standard, model, pop);
  CHECK(certify_nash(standard, model, pop, eq, grid) <= 1e-4);

  // all-zeros is an exact equilibrium when nobody is viable
  const Population hopeless = Population::from_costs({0.5, 0.8});
  CHECK(certify_nash(standard, model, hopeless, {0.0, 0.0}, grid) == 0.0);

  // perturbing one agent creates visible regret
  ContributionProfile off = eq;
  off[0] += 1.0;
  CHECK(certify_nash(standard, model, pop, off, grid) > 1e-6);
}

TEST_CASE("analytic and grid best responses agree on random instances") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec grid{10000, 2};
  for (int t = 0; t < 100; ++t) {
    const AccuracyModel model = testgen::random_model(rng);
    Population pop = testgen::random_population(rng, 4);
    const MechanismSpec mech = [&]() -> MechanismSpec {
      const double roll = u(rng);
      if (roll < 0.34) return MechanismSpec::standard();
      if (roll < 0.67) return MechanismSpec::shaping_known(1e-6);
      pop.has_two_type = true;
      double lo = pop.min_cost(), hi = lo;
      for (const Agent& a : pop.agents) hi = std::max(hi, a.cost);
      pop.two_type = TwoTypeSpec{lo, hi, std::vector<double>(pop.size(), u(rng))};
      for (Agent& a : pop.agents) a.cost = u(rng) < 0.5 ? lo : hi;
      return MechanismSpec::shaping_two_type(1e-6);
    }();
    const std::vector<double> profile = testgen::random_profile(rng, pop, 0.5);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const double br = best_response(mech, model, pop, i, profile);
      const double gbr = grid_best_response(mech, model, pop, i, profile, grid);
      const AllocationCurve curve =
          allocation_curve(mech, model, pop, i, others_total(profile, i));
      const double du = (curve(gbr) - pop.cost(i) * gbr) -
                        (curve(br) - pop.cost(i) * br);
      const bool close = std::abs(br - gbr) <= 2.0 * grid.resolution(pop.cost(i));
      CHECK((close || du <= 1e-12));
    }
  }
}

TEST_CASE("no enumerated feasible+IR alternative out-collects shaping") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);

  SUBCASE("two agents") {
    const Population pop = Population::from_costs({0.01, 0.02});
    const SpotCheckReport report = spot_check_data_max(model, pop, 1e-6, 19);
    CHECK(report.pass);
    CHECK(report.worst_excess <= 1e-3);
    CHECK(report.shaping_total > 0.0);
    bool saw_ir_violation = false;
    for (const SpotCheckEntry& e : report.entries) {
      if (!e.ir) saw_ir_violation = true;  // sub-cost slopes must be caught
      if (e.feasible && e.ir) CHECK(e.total <= report.shaping_total + 1e-3);
    }
    CHECK(saw_ir_violation);
  }
  SUBCASE("three agents, shaping beats standard") {
    const Population pop = Population::from_costs({0.01, 0.015, 0.02});
    const SpotCheckReport report = spot_check_data_max(model, pop, 1e-6, 10);
    CHECK(report.pass);
    const ContributionProfile std_eq =
        closed_form_equilibrium(MechanismSpec::standard(), model, pop);
    double std_total = 0.0;
    for (double m : std_eq) std_total += m;
    CHECK(report.shaping_total > std_total + 1.0);
  }
  CHECK_THROWS_AS(
      spot_check_data_max(model, Population::from_costs({0.1, 0.1, 0.1, 0.1}),
                          1e-6),
      std::invalid_argument);
}

TEST_CASE("screening menu maximizes expected data over the contract scan") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const double eps = 1e-9;

  SUBCASE("above the prior threshold the clamp is optimal") {
    // p >= c_low/(c_low+c_high): the schedule picks saturation_low, and no
    // scanned m_down does better. Forcing the high saturation instead loses
    // expected data strictly.
    const TwoTypeSpotCheck scan =
        spot_check_two_type(model, 0.005, 0.01, 0.5, eps, 100.0);
    CHECK(scan.schedule_expected >= scan.best_scan_expected - 1e-3);
    const TwoTypeSchedule menu = two_type_schedule(model, 0.005, 0.01, 0.5, eps, 100.0);
    const double a_high = model.eval(menu.high_optimum);
    const double up_forced =
        (a_high - (0.01 + eps) * menu.high_optimum -
         model.eval(menu.saturation_high + 100.0) + (0.005 + eps) * menu.saturation_high) /
        (0.005 - 0.01);
    const double forced_expected =
        0.5 * std::clamp(up_forced, menu.high_optimum, menu.saturation_high) +
        0.5 * menu.saturation_high;
    CHECK(scan.schedule_expected > forced_expected + 1e-3);
  }
  SUBCASE("below the threshold an interior point is selected") {
    // p < c_low/(c_low+c_high): the slope target stays positive and the
    // contract lands inside (saturation_high, saturation_low).
    const TwoTypeSpotCheck scan =
        spot_check_two_type(model, 0.004, 0.02, 0.1, eps, 30.0);
    const TwoTypeSchedule menu = two_type_schedule(model, 0.004, 0.02, 0.1, eps, 30.0);
    CHECK(menu.contract_low < menu.saturation_low - 1e-6);
    CHECK(menu.contract_low > menu.saturation_high + 1e-6);
    // The schedule never leaves the menu family the scan enumerates.
    CHECK(scan.schedule_expected <= scan.best_scan_expected + 1e-9);
    // The scan's maximizer sits where the exact first-order condition
    // b'(m + others) = c_low + eps - p/(1-p) (c_high - c_low) puts it; the
    // schedule's slope target uses c_high alone and lands further right.
    const double exact_target =
        0.004 + eps - 0.1 / 0.9 * (0.02 - 0.004);
    const InverseSlope inv = model.inverse_slope(exact_target);
    REQUIRE(inv.finite());
    CHECK(scan.scan_argmax_down == doctest::Approx(inv.m - 30.0).epsilon(2e-2));
    CHECK(menu.contract_low > scan.scan_argmax_down);
  }
}
