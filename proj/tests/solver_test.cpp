#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "superhedge/oracle.hpp"
#include "superhedge/solver.hpp"
#include "test_util.hpp"

using namespace superhedge;
using shtest::frictionless_binomial;
using shtest::pos;

namespace {

std::size_t cell_of(const PositionGrid& grid, double v) {
  const GridAxis& ax = grid.axis(0);
  const long idx = std::lround(v / ax.step) + ax.zero_index;
  REQUIRE(idx >= 0);
  REQUIRE(idx < ax.count);
  std::vector<double> check(1);
  grid.point_at(static_cast<std::size_t>(idx), check);
  REQUIRE(check[0] == doctest::Approx(v).epsilon(1e-12));
  return static_cast<std::size_t>(idx);
}

}  // namespace

TEST_CASE("terminal layer evaluates the hedged claim") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    1, -2.0, 2.0, 0.5);
  Solver solver(inst);
  const auto result = solver.solve();
  const auto& grid = inst.grid;
  // terminal node with price 120: gamma_T(s, 0.5) = 20 + (0 - 0.5) * 120
  const std::size_t up = 1;  // layer sorted by price: {80, 120}
  CHECK(solver.lattice().state(1, up)[0] == doctest::Approx(120.0));
  CHECK(result.layers[1].gamma[up][cell_of(grid, 0.5)] == doctest::Approx(-40.0));
  CHECK(result.layers[1].gamma[up][cell_of(grid, 0.0)] == doctest::Approx(20.0));
  // and the down node pays nothing
  CHECK(result.layers[1].gamma[0][cell_of(grid, 0.0)] == doctest::Approx(0.0));
}

TEST_CASE("order book terminal layer prices a physical-style table claim") {
  Instance inst;
  inst.market = std::make_shared<OrderBookModel>(1, 2);
  // asks [(10, qty 5), (11, inf)]
  inst.initial_state = shtest::ob2_state(9.0, 8.0, 5.0, 10.0, 11.0, 5.0);
  inst.support = SupportModel::multiplicative({std::vector<double>(6, 1.0)});
  inst.payoff = Payoff::custom_table({pos(0.0, {7.0})});
  inst.horizon = 1;
  inst.grid = PositionGrid({-8.0}, {8.0}, {0.5});
  Solver solver(inst);
  const auto result = solver.solve();
  CHECK(result.layers[1].gamma[0][inst.grid.zero_flat()] == doctest::Approx(72.0));
}

TEST_CASE("sup step takes the exact finite max over successors") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    1, -2.0, 2.0, 0.5);
  Solver solver(inst);
  const auto result = solver.solve();
  const auto& grid = inst.grid;
  // theta_0(v=0.5) = max(20 - 60, 0 - 40) = -40
  CHECK(result.layers[0].theta[0][cell_of(grid, 0.5)] == doctest::Approx(-40.0));
  // zero claim: theta(v) = max(-80 v, -120 v) = -80 v for v >= 0
  const auto zero = solver.zero_solve();
  for (double v : {0.0, 0.5, 1.0, 2.0})
    CHECK(zero->layers[0].theta[0][cell_of(grid, v)] == doctest::Approx(-80.0 * v));
  for (double v : {-0.5, -1.0})
    CHECK(zero->layers[0].theta[0][cell_of(grid, v)] ==
          doctest::Approx(-120.0 * v));
}

TEST_CASE("single-successor lattice copies the next layer") {
  auto inst = frictionless_binomial(100.0, 1.0, 1.0, Payoff::cash_call(90.0, 0),
                                    1, -2.0, 2.0, 0.5);
  inst.support = SupportModel::multiplicative({{1.0, 1.0}});
  Solver solver(inst);
  const auto result = solver.solve();
  for (std::size_t c = 0; c < inst.grid.size(); ++c)
    CHECK(result.layers[0].theta[0][c] == result.layers[1].gamma[0][c]);
}

TEST_CASE("one-step frictionless binomial call replicates at 10") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2,
                                    Payoff::cash_call(100.0, 0), 1);
  Solver solver(inst);
  const auto result = solver.solve();
  CHECK(result.price == doctest::Approx(10.0).epsilon(1e-12));
  // the minimizer is the replicating delta y = 0.5
  const auto arg = result.policy.at(0, 0, inst.grid.zero_flat());
  std::vector<double> y(1);
  inst.grid.point_at(arg, y);
  CHECK(y[0] == doctest::Approx(0.5));
  // the recorded action reproduces the tabulated value exactly
  const double replay =
      inst.market->cost_risky(0, solver.lattice().state(0, 0), y) +
      result.layers[0].theta[0][arg];
  CHECK(replay == result.price);
}

TEST_CASE("zero claim prices to zero with the no-trade policy") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::zero(), 1);
  Solver solver(inst);
  const auto result = solver.solve();
  CHECK(result.price == 0.0);
  CHECK(result.policy.at(0, 0, inst.grid.zero_flat()) == inst.grid.zero_flat());
}

TEST_CASE("pinned grid reduces the recursion to the no-trade cost") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    1, 0.0, 0.0, 1.0);
  REQUIRE(inst.grid.size() == 1);
  Solver solver(inst);
  const auto result = solver.solve();
  // gamma_0(0) = cost of doing nothing + theta(0) = 0 + max(20, 0)
  CHECK(result.price == doctest::Approx(20.0));
}

TEST_CASE("sphere infimum matches the two-point hand computation") {
  SUBCASE("spot strictly inside the support") {
    auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0), 1);
    Solver solver(inst);
    const auto result = solver.solve();
    CHECK(result.diagnostics.layers[0].sphere_inf == doctest::Approx(20.0).epsilon(1e-9));
    CHECK_FALSE(result.diagnostics.layers[0].fallback_engaged);
    // conic identity delta: at v = 0 the radius is lambda/i + 1 with
    // lambda = |D(0,0)| = theta(0) = 20 and i = 20.
    CHECK(result.diagnostics.layers[0].radius_min == doctest::Approx(2.0));
  }
  SUBCASE("spot equal to the support maximum degrades to the fallback") {
    auto inst = frictionless_binomial(120.0, 80.0 / 120.0, 1.0,
                                      Payoff::cash_call(100.0, 0), 1);
    Solver solver(inst);
    const auto result = solver.solve();
    CHECK(std::fabs(result.diagnostics.layers[0].sphere_inf) <= 1e-9);
    CHECK(result.diagnostics.layers[0].fallback_engaged);

    SolverOptions strict;
    strict.fallback_auto = false;
    Solver no_fallback(inst, strict);
    CHECK_THROWS_AS(no_fallback.solve(), RadiusDegenerate);
  }
}

TEST_CASE("two-step recombining binomial matches the closed form") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    2, -2.0, 2.0, 1.0 / 1200.0);
  Solver solver(inst);
  const auto result = solver.solve();
  const double oracle = binomial_frictionless_price(100.0, 1.2, 0.8, 100.0, 2);
  CHECK(oracle == doctest::Approx(11.0));
  CHECK(result.price == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("rollout replicates the binomial call exactly") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0), 1);
  Solver solver(inst);
  const auto result = solver.solve();
  const auto report = rollout(result, inst, 10.0);
  REQUIRE(report.paths.size() == 2);
  for (const auto& path : report.paths) CHECK(path.shortfall == 0.0);
  CHECK(report.worst_shortfall == 0.0);

  // an under-funded rollout reports the deficit instead of throwing
  const auto poor = rollout(result, inst, 9.0);
  CHECK(poor.worst_shortfall == doctest::Approx(-1.0));
}

TEST_CASE("zero claim rollout never trades") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::zero(), 2, -2.0,
                                    2.0, 0.25);
  Solver solver(inst);
  const auto result = solver.solve();
  const auto report = rollout(result, inst, 0.0);
  for (const auto& path : report.paths) {
    CHECK(path.shortfall == 0.0);
    for (double c : path.trade_costs) CHECK(c == 0.0);
  }
}

TEST_CASE("grid refinement never raises the price") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Instance inst = shtest::random_small_instance(rng);
    Solver coarse(inst);
    const double coarse_price = coarse.solve().price;
    Instance fine = inst;
    fine.grid = inst.grid.refined();
    Solver refined(fine);
    const double fine_price = refined.solve().price;
    CHECK(fine_price <= coarse_price + 1e-9);
  }
}

TEST_CASE("convex costs propagate convex value layers") {
  auto check_layers = [](const SolveResult& result, const PositionGrid& grid) {
    for (const auto& layer : result.layers) {
      REQUIRE(layer.convex_flag);
      CHECK(layer.midpoint_convexity_violation(grid) <= 1e-8);
    }
  };
  {
    auto inst = frictionless_binomial(100.0, 0.8, 1.2,
                                      Payoff::cash_call(100.0, 0), 2, -2.0, 2.0, 0.05);
    Solver solver(inst);
    check_layers(solver.solve(), inst.grid);
  }
  {
    Instance inst;
    inst.market = std::make_shared<OrderBookModel>(1, 2);
    inst.initial_state = shtest::ob2_state(99.5, 99.0, 5.0, 100.5, 101.0, 5.0);
    inst.support = SupportModel::multiplicative(
        {std::vector<double>(6, 0.8), std::vector<double>(6, 1.2)});
    inst.payoff = Payoff::cash_call(100.0, 0);
    inst.horizon = 2;
    inst.grid = PositionGrid({-2.0}, {2.0}, {0.05});
    Solver solver(inst);
    check_layers(solver.solve(), inst.grid);
  }
}

TEST_CASE("terminal gamma is nonincreasing in the risky position") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    1, -2.0, 2.0, 0.05);
  Solver solver(inst);
  const auto result = solver.solve();
  CHECK(result.layers[1].monotone_nonincreasing_violation(inst.grid) <= 1e-12);
}

TEST_CASE("one-step cost functional is sub-additive for sub-additive models") {
  // D_t^xi(v+w, y+z) <= D_t^xi(v, y) + D_t^0(w, z) on grid points.
  Instance inst;
  inst.market = std::make_shared<FixedCostModel>(1);
  inst.initial_state = shtest::fc_state(99.5, 100.5, 0.25);
  inst.support = SupportModel::multiplicative({{0.8, 0.8, 1.0}, {1.2, 1.2, 1.0}});
  inst.payoff = Payoff::cash_call(100.0, 0);
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
  Solver solver(inst);
  const auto result = solver.solve();
  const auto zero = solver.zero_solve();
  const auto& grid = inst.grid;
  const MarketState& s = solver.lattice().state(0, 0);

  auto d_value = [&](const SolveResult& res, double v, double y) {
    const double z[1] = {y - v};
    return inst.market->cost_risky(0, s, z) +
           res.layers[0].theta[0][cell_of(grid, y)];
  };
  std::mt19937 rng(37);
  std::uniform_int_distribution<int> pick(-4, 4);  // quarter-unit grid points
  for (int i = 0; i < 500; ++i) {
    const double v = 0.25 * pick(rng), w = 0.25 * pick(rng);
    const double y = 0.25 * pick(rng), z = 0.25 * pick(rng);
    if (std::fabs(v + w) > 2.0 || std::fabs(y + z) > 2.0) continue;
    CHECK(d_value(result, v + w, y + z) <=
          d_value(result, v, y) + d_value(*zero, w, z) + 1e-9);
  }
}

TEST_CASE("zero-claim cost functional scales super homogeneously") {
  // Conic market: D_t^0(lambda v, lambda y) >= lambda * D_t^0(v, y).
  Instance inst;
  inst.market = std::make_shared<ProportionalModel>(1);
  inst.initial_state = shtest::prop_state(99.0, 101.0);
  inst.support = SupportModel::multiplicative({{0.8, 0.8}, {1.2, 1.2}});
  inst.payoff = Payoff::zero();
  inst.horizon = 2;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.125});
  Solver solver(inst);
  const auto zero = solver.zero_solve();
  const auto& grid = inst.grid;

  auto d_value = [&](int t, std::uint32_t node, double v, double y) {
    const double z[1] = {y - v};
    const double yy[1] = {y};
    return inst.market->cost_risky(t, solver.lattice().state(t, node), z) +
           grid.interpolate(zero->layers[t].theta[node], yy);
  };
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> lam(1.0, 4.0), point(-0.5, 0.5);
  for (int t = 0; t < 2; ++t) {
    for (std::uint32_t n = 0; n < solver.lattice().layer_size(t); ++n) {
      for (int i = 0; i < 200; ++i) {
        const double l = lam(rng);
        const double v = 0.125 * std::round(point(rng) / 0.125);
        const double y = 0.125 * std::round(point(rng) / 0.125);
        if (l * std::fmax(std::fabs(v), std::fabs(y)) > 2.0) continue;
        CHECK(d_value(t, n, l * v, l * y) >=
              l * d_value(t, n, v, y) - 1e-9);
      }
    }
  }
}

TEST_CASE("nonnegative claims dominate the zero claim") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    Instance inst = shtest::random_small_instance(rng);
    inst.payoff = Payoff::cash_call(95.0, 0);
    Solver solver(inst);
    const auto result = solver.solve();
    const auto zero = solver.zero_solve();
    for (std::size_t t = 0; t < result.layers.size(); ++t)
      for (std::size_t n = 0; n < result.layers[t].gamma.size(); ++n)
        for (std::size_t c = 0; c < inst.grid.size(); ++c)
          CHECK(result.layers[t].gamma[n][c] >=
                zero->layers[t].gamma[n][c] - 1e-9);
  }
}

TEST_CASE("claims beyond the market's liquidity bound are not hedgeable") {
  // A custom model with a hard one-period position cap: costs are infinite
  // beyond half a unit, so a claim of 1.5 units cannot be reached.
  CostFlags flags;  // no structural declarations: the solver scans the grid
  auto capped_cost = [](int, const MarketState& s, std::span<const double> y) {
    if (std::fabs(y[0]) > 0.5) return kInf;
    return y[0] * s[0];
  };
  auto bound = [](int, const MarketState& s, std::span<const double> y) {
    return std::fabs(y[0]) * s[0];
  };
  Instance inst;
  inst.market = std::make_shared<CustomModel>(1, 1, capped_cost, bound, flags);
  inst.initial_state = MarketState{{100.0}};
  inst.support = SupportModel::multiplicative({{0.9}, {1.1}});
  inst.payoff = Payoff::custom_table({pos(0.0, {1.5}), pos(0.0, {1.5})});
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
  Solver solver(inst);
  CHECK_THROWS_AS(solver.solve(), NotHedgeable);

  // the zero claim stays hedgeable in the same market
  inst.payoff = Payoff::zero();
  Solver zero_solver(inst);
  CHECK(zero_solver.solve().price == 0.0);
}

TEST_CASE("a custom model with a tabulated delta law prices like its built-in twin") {
  // Same proportional cost, declared through the custom surface with the
  // delta law given as a table; the radius machinery must run through the
  // tabulated inverse and leave the price untouched.
  CostFlags flags;
  flags.convex = true;
  flags.sub_additive = true;
  flags.h_bounds_increments = true;
  flags.delta = DeltaLaw::from_table({{1.0, 1.0}, {2.0, 2.0}, {8.0, 8.0}});
  auto cost = [](int, const MarketState& s, std::span<const double> y) {
    return y[0] >= 0.0 ? y[0] * s[1] : y[0] * s[0];
  };
  auto bound = [](int, const MarketState& s, std::span<const double> y) {
    return (s[0] + s[1]) * std::fabs(y[0]);
  };
  Instance inst;
  inst.market = std::make_shared<CustomModel>(
      1, 2, cost, bound, flags,
      [](const MarketState& s, int) { return 0.5 * (s[0] + s[1]); });
  inst.initial_state = shtest::prop_state(100.0, 100.0);
  inst.support = SupportModel::multiplicative({{0.8, 0.8}, {1.2, 1.2}});
  inst.payoff = Payoff::cash_call(100.0, 0);
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.001});
  Solver solver(inst);
  const auto custom = solver.solve();
  CHECK(custom.price == 10.0);
  CHECK(custom.diagnostics.layers[0].sphere_inf == doctest::Approx(20.0));

  Instance twin = inst;
  twin.market = std::make_shared<ProportionalModel>(1);
  Solver twin_solver(twin);
  CHECK(twin_solver.solve().price == custom.price);
}

TEST_CASE("two risky assets: solver equals the oracle on the full grid") {
  Instance inst;
  inst.market = std::make_shared<ProportionalModel>(2);
  inst.initial_state = MarketState{{100.0, 100.0, 50.0, 50.0}};
  inst.support = SupportModel::multiplicative(
      {{0.8, 0.8, 1.1, 1.1}, {1.2, 1.2, 0.9, 0.9}});
  inst.payoff = Payoff::basket_call({1.0, 1.0}, 150.0);
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0, -2.0}, {2.0, 2.0}, {1.0, 1.0});
  Solver solver(inst);
  const auto result = solver.solve();
  CHECK(result.price == enumerate_price(inst));
  CHECK(std::isfinite(result.price));
  // hedging both legs: the policy at the root holds a position per asset
  const auto arg = result.policy.at(0, 0, inst.grid.zero_flat());
  REQUIRE(arg != HedgePolicy::kNoAction);
  const double slack = lipschitz_slack(inst, solver.lattice());
  CHECK(verify_superhedge(result, inst, slack) >= -1e-8);
}

TEST_CASE("states violating the market layout are rejected at construction") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0), 1);
  // this factor pair pushes the bid above the ask one step in
  inst.support = SupportModel::multiplicative({{1.3, 0.7}});
  CHECK_THROWS_AS(Solver{inst}, InvalidState);
}

TEST_CASE("null-space reduction drops certified free axes without changing prices") {
  // Asset 2 trades frictionlessly at a constant price: positions along it
  // are free in both directions, so the candidate search can pin it at 0.
  Instance inst;
  inst.market = std::make_shared<ProportionalModel>(2);
  inst.initial_state = MarketState{{100.0, 100.0, 50.0, 50.0}};
  inst.support = SupportModel::multiplicative(
      {{0.8, 0.8, 1.0, 1.0}, {1.2, 1.2, 1.0, 1.0}});
  inst.payoff = Payoff::cash_call(100.0, 0);
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0, -2.0}, {2.0, 2.0}, {0.1, 0.1});

  Solver plain(inst);
  const auto base = plain.solve();

  SolverOptions reduce;
  reduce.use_null_space_reduction = true;
  Solver reduced(inst, reduce);
  const auto result = reduced.solve();

  CHECK(result.diagnostics.layers[0].null_axes_dropped == 1);
  CHECK(result.diagnostics.layers[0].avg_candidates <
        base.diagnostics.layers[0].avg_candidates / 10.0);
  CHECK(result.price == doctest::Approx(base.price).epsilon(1e-12));

  // A market with genuine risk in every coordinate must not be reduced.
  Instance risky = inst;
  risky.support = SupportModel::multiplicative(
      {{0.8, 0.8, 0.9, 0.9}, {1.2, 1.2, 1.1, 1.1}});
  Solver untouched(risky, reduce);
  CHECK(untouched.solve().diagnostics.layers[0].null_axes_dropped == 0);
}

TEST_CASE("solver is deterministic across thread counts") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::cash_call(100.0, 0),
                                    2, -2.0, 2.0, 0.01);
  SolverOptions serial;
  serial.threads = 1;
  SolverOptions parallel;
  parallel.threads = 4;
  const auto a = Solver(inst, serial).solve();
  const auto b = Solver(inst, parallel).solve();
  REQUIRE(a.price == b.price);
  for (std::size_t t = 0; t < a.layers.size(); ++t)
    for (std::size_t n = 0; n < a.layers[t].gamma.size(); ++n)
      for (std::size_t c = 0; c < inst.grid.size(); ++c) {
        REQUIRE(a.layers[t].gamma[n][c] == b.layers[t].gamma[n][c]);
        if (t < a.layers.size() - 1)
          REQUIRE(a.policy.at(t, n, c) == b.policy.at(t, n, c));
      }
}
