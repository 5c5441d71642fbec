#include <cmath>
#include <random>

#include "doctest.h"
#include "incmech/equilibrium.hpp"
#include "incmech/verify.hpp"

using namespace incmech;

TEST_CASE("best response under the standard mechanism") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.02});
  const MechanismSpec standard = MechanismSpec::standard();

  // others already supply the cheapest agent's solo optimum: free ride
  const double mstar = individual_optimum(model, Agent{0.01});
  CHECK(best_response(standard, model, pop, 1, {mstar, 0.0}) == 0.0);

  // alone, the best response is the solo optimum
  CHECK(best_response(standard, model, pop, 0, {0.0, 0.0}) ==
        doctest::Approx(mstar).epsilon(1e-8));

  // partial pool: top up to the stationary point
  CHECK(best_response(standard, model, pop, 0, {0.0, 10.0}) ==
        doctest::Approx(mstar - 10.0).epsilon(1e-6));

  // hopeless cost
  const Population pricey = Population::from_costs({5.0});
  CHECK(best_response(standard, model, pricey, 0, {0.0}) == 0.0);
}

TEST_CASE("best response under shaping saturates the incentive line") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.01});
  const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
  const double others = 60.0;
  const KnownShapingSchedule sched = known_schedule(model, 0.01, 1e-6, others);
  const double br = best_response(shaping, model, pop, 0, {0.0, others});
  CHECK(br == doctest::Approx(sched.saturation).epsilon(1e-6));
  CHECK(br >= sched.own_optimum);
}

TEST_CASE("dynamics reach the free-riding profile of the standard mechanism") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.02, 0.05});
  ContributionProfile init;
  for (const Agent& a : pop.agents)
    init.push_back(individual_optimum(model, a));

  const EquilibriumResult res =
      best_response_dynamics(MechanismSpec::standard(), model, pop, init);
  REQUIRE(res.converged);
  CHECK(res.profile[0] == doctest::Approx(21.5443469).epsilon(1e-6));
  CHECK(res.profile[1] < 1e-6);
  CHECK(res.profile[2] < 1e-6);
  CHECK(res.nash_regret <= 1e-4);
  CHECK(res.total() == doctest::Approx(21.5443469).epsilon(1e-5));
}

TEST_CASE("the all-zero profile is a one-iteration fixed point when nobody is viable") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.5, 0.9});
  const EquilibriumResult res = best_response_dynamics(
      MechanismSpec::shaping_known(1e-6), model, pop, {0.0, 0.0});
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.profile[0] == 0.0);
  CHECK(res.profile[1] == 0.0);
  CHECK(res.nash_regret == 0.0);
}

TEST_CASE("two identical shaping agents settle at a common saturation point") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.01});
  const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
  const double mstar = individual_optimum(model, Agent{0.01});
  const EquilibriumResult res =
      best_response_dynamics(shaping, model, pop, {mstar, mstar});
  REQUIRE(res.converged);
  CHECK(res.profile[0] == doctest::Approx(res.profile[1]).epsilon(1e-8));
  CHECK(res.profile[0] >= mstar);
  CHECK(res.nash_regret < 1e-6);
  // agrees with the closed-form fixed point
  const ContributionProfile eq = closed_form_equilibrium(shaping, model, pop);
  CHECK(res.profile[0] == doctest::Approx(eq[0]).epsilon(1e-6));
}

TEST_CASE("closed-form equilibria") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);

  SUBCASE("standard: only the cheapest agent contributes") {
    const Population pop = Population::from_costs({0.02, 0.01});
    const ContributionProfile eq =
        closed_form_equilibrium(MechanismSpec::standard(), model, pop);
    CHECK(eq[0] == 0.0);
    CHECK(eq[1] == doctest::Approx(21.5443469).epsilon(1e-6));
  }
  SUBCASE("standard: ties go to the lowest index") {
    const Population pop = Population::from_costs({0.01, 0.01});
    const ContributionProfile eq =
        closed_form_equilibrium(MechanismSpec::standard(), model, pop);
    CHECK(eq[0] > 0.0);
    CHECK(eq[1] == 0.0);
  }
  SUBCASE("shaping with three identical agents") {
    const Population pop = Population::from_costs({0.01, 0.01, 0.01});
    const ContributionProfile eq =
        closed_form_equilibrium(MechanismSpec::shaping_known(1e-9), model, pop);
    // Each contribution beats the n >= 3 lower bound 1.5 (k/c^2)^{1/3}.
    for (double m : eq) {
      CHECK(m == doctest::Approx(47.959).epsilon(1e-3));
      CHECK(m >= 1.5 * std::cbrt(1e4) - 1e-6);
    }
  }
  SUBCASE("shaping with heterogeneous costs stays above the solo optima") {
    const Population pop = Population::from_costs({0.005, 0.01, 0.02});
    const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
    const ContributionProfile eq = closed_form_equilibrium(shaping, model, pop);
    for (std::size_t i = 0; i < pop.size(); ++i)
      CHECK(eq[i] >= individual_optimum(model, pop.agents[i]) - 1e-9);
    CHECK(certify_nash(shaping, model, pop, eq, {4000, 2}) <= 1e-4);
  }
}

TEST_CASE("shaping utilities match the solo utilities up to the epsilon drift") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.005, 0.01});
  const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
  const ContributionProfile eq = closed_form_equilibrium(shaping, model, pop);
  const std::vector<double> acc = allocate(shaping, model, pop, eq);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double u_eq = acc[i] - pop.cost(i) * eq[i];
    const double mstar = individual_optimum(model, pop.agents[i]);
    const double u_solo = utility(model, pop.agents[i], mstar);
    CHECK(std::abs(u_eq - u_solo) <= 1e-6 * eq[i] + 1e-6);
  }
}

TEST_CASE("two-type equilibrium: contracts, rent, and consistency") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const double c_low = 0.005, c_high = 0.01, p = 0.5, eps = 1e-6;

  const auto [xh, xl] =
      two_type_symmetric_equilibrium(model, c_low, c_high, p, eps, 2, 3);
  CHECK(xh > 0.0);
  CHECK(xl > xh);

  // the general fixed point over a realized population agrees
  Population pop = Population::from_costs({c_high, c_high, c_low, c_low, c_low});
  pop.has_two_type = true;
  pop.two_type = TwoTypeSpec{c_low, c_high, std::vector<double>(5, p)};
  const MechanismSpec mech = MechanismSpec::shaping_two_type(eps);
  const ContributionProfile eq = closed_form_equilibrium(mech, model, pop);
  CHECK(eq[0] == doctest::Approx(xh).epsilon(1e-6));
  CHECK(eq[2] == doctest::Approx(xl).epsilon(1e-6));

  // high type keeps its solo utility (within the epsilon drift),
  // low type earns a non-negative information rent
  const std::vector<double> acc = allocate(mech, model, pop, eq);
  const double u_high = acc[0] - c_high * eq[0];
  const double u_high_solo =
      utility(model, Agent{c_high}, individual_optimum(model, Agent{c_high}));
  CHECK(std::abs(u_high - u_high_solo) <= eps * eq[0] + 1e-6);
  const double u_low = acc[2] - c_low * eq[2];
  const double u_low_solo =
      utility(model, Agent{c_low}, individual_optimum(model, Agent{c_low}));
  CHECK(u_low >= u_low_solo - 1e-9);

  CHECK(certify_nash(mech, model, pop, eq, {4000, 2}) <= 1e-4);
}

TEST_CASE("shared-cost viability root") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);

  // no positive crossing for a lone non-viable agent
  CHECK(min_viability_total(model, 0.1, 1) == 0.0);

  const double root = min_viability_total(model, 0.1, 100);
  CHECK(root == doctest::Approx(882.68).epsilon(1e-3));
  CHECK(std::abs(model.eval(root) - 0.001 * root) < 1e-8);

  // Once n covers the startup hump, the pool reaches at least a_opt n / (2c).
  for (double c : {0.05, 0.1, 0.3}) {
    for (int n : {8, 32, 128, 1024}) {
      if (n < 32.0 * c * 1.0 / std::pow(0.95, 3.0)) continue;
      CHECK(min_viability_total(model, c, n) >= 0.95 * n / (2.0 * c) - 1e-9);
    }
  }
}

TEST_CASE("shaping best responses are monotone in the others' total and dominate") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MechanismSpec shaping = MechanismSpec::shaping_known(1e-6);
  const MechanismSpec standard = MechanismSpec::standard();
  for (int t = 0; t < 100; ++t) {
    const AccuracyModel model = testgen::random_model(rng);
    const double cost = testgen::random_cost(rng);
    const Population pop = Population::from_costs({cost, cost});
    // keep the incentive segment live: others' data past the dead zone
    const double own = individual_optimum(model, Agent{cost});
    const double base = own > 0.0 ? 0.0 : 1.01 * model.min_viable_dataset();
    const double d1 = base + 60.0 * u(rng) + 0.1;
    const double d2 = d1 + 1.0 + 60.0 * u(rng);
    const double br1 = best_response(shaping, model, pop, 0, {0.0, d1});
    const double br2 = best_response(shaping, model, pop, 0, {0.0, d2});
    const KnownShapingSchedule s1 = known_schedule(model, cost, 1e-6, d1);
    const KnownShapingSchedule s2 = known_schedule(model, cost, 1e-6, d2);
    CHECK(s2.saturation >= s1.saturation - 1e-9);
    const InverseSlope stat = model.inverse_slope(cost);
    const double sliver =
        stat.finite() ? std::max(0.0, stat.m - d1 - s1.saturation) : 0.0;
    CHECK(br2 >= br1 - sliver - 1e-7);
    CHECK(br1 >= best_response(standard, model, pop, 0, {0.0, d1}) - 1e-7);
  }
}

TEST_CASE("non-convergence is reported, not hidden") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01, 0.011});
  DynamicsOptions opts;
  opts.max_iter = 2;  // starve the iteration
  opts.certify = false;
  const EquilibriumResult res = best_response_dynamics(
      MechanismSpec::standard(), model, pop,
      {individual_optimum(model, pop.agents[0]),
       individual_optimum(model, pop.agents[1])},
      opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
}

TEST_CASE("equilibrium result serializes to JSON") {
  const AccuracyModel model = AccuracyModel::simple_bound(0.95, 1.0);
  const Population pop = Population::from_costs({0.01});
  const EquilibriumResult res = best_response_dynamics(
      MechanismSpec::standard(), model, pop, {0.0});
  const nlohmann::json j = to_json(res);
  CHECK(j.contains("profile"));
  CHECK(j.contains("accuracies"));
  CHECK(j.contains("utilities"));
  CHECK(j.contains("nash_regret"));
  CHECK(j.contains("iterations"));
  CHECK(j["converged"].get<bool>());
}
