#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "superhedge/arbitrage.hpp"
#include "superhedge/oracle.hpp"
#include "test_util.hpp"

using namespace superhedge;
using shtest::frictionless_binomial;

TEST_CASE("aip holds when the spot sits strictly inside the support") {
  auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::zero(), 1);
  Solver solver(inst);
  const auto zero = solver.zero_solve();
  const auto aip = check_aip(*zero, inst.grid, 0, 1e-8);
  CHECK(aip.aip);
  CHECK(aip.residual <= 1e-9);
  CHECK_FALSE(aip.boundary_hit);
}

TEST_CASE("aip fails with a boundary hit when every successor lies above") {
  auto inst = frictionless_binomial(100.0, 1.1, 1.2, Payoff::zero(), 1);
  Solver solver(inst);
  const auto zero = solver.zero_solve();
  const auto aip = check_aip(*zero, inst.grid, 0, 1e-8);
  CHECK_FALSE(aip.aip);
  CHECK(aip.boundary_hit);
  // buying at 100 and selling at >= 110 gains at least 10 per unit; on the
  // compact grid the minimizer saturates at the edge y = 2.
  CHECK(zero->layers[0].gamma[0][inst.grid.zero_flat()] ==
        doctest::Approx(-20.0));
}

TEST_CASE("order book with positive spread keeps aip, cross-checked by enumeration") {
  Instance inst;
  inst.market = std::make_shared<OrderBookModel>(1, 2);
  inst.initial_state = shtest::ob2_state(99.5, 99.0, 5.0, 100.5, 101.0, 5.0);
  inst.support = SupportModel::multiplicative(
      {std::vector<double>(6, 0.9), std::vector<double>(6, 1.1)});
  inst.payoff = Payoff::zero();
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
  Solver solver(inst);
  const auto zero = solver.zero_solve();
  CHECK(check_aip(*zero, inst.grid, 0, 1e-8).aip);
  CHECK(enumerate_price(inst) == 0.0);
  CHECK(zero->price == 0.0);
}

TEST_CASE("saip two-point evaluations") {
  SUBCASE("interior spot: i_0 = 20") {
    auto inst = frictionless_binomial(100.0, 0.8, 1.2, Payoff::zero(), 1);
    Solver solver(inst);
    const auto saip =
        check_saip(*solver.zero_solve(), *inst.market, inst.grid, 0, 1e-8, 1e-8, 128);
    CHECK(saip.sphere_inf == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(saip.saip);
  }
  SUBCASE("spot at the support maximum: i_0 = 0, aip still holds") {
    auto inst = frictionless_binomial(120.0, 80.0 / 120.0, 1.0, Payoff::zero(), 1);
    Solver solver(inst);
    const auto zero = solver.zero_solve();
    const auto saip = check_saip(*zero, *inst.market, inst.grid, 0, 1e-8, 1e-8, 128);
    CHECK(std::fabs(saip.sphere_inf) <= 1e-9);
    CHECK_FALSE(saip.saip);
    CHECK(check_aip(*zero, inst.grid, 0, 1e-8).aip);
  }
  SUBCASE("proportional spread keeps a positive sphere infimum") {
    Instance inst;
    inst.market = std::make_shared<ProportionalModel>(1);
    inst.initial_state = shtest::prop_state(99.0, 101.0);
    inst.support = SupportModel::multiplicative({{0.8, 0.8}, {1.2, 1.2}});
    inst.payoff = Payoff::zero();
    inst.horizon = 1;
    inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
    Solver solver(inst);
    const auto saip =
        check_saip(*solver.zero_solve(), *inst.market, inst.grid, 0, 1e-8, 1e-8, 128);
    // buy at 101, best later bid 79.2: 21.8; sell at 99, worst later ask 121.2: 22.2
    CHECK(saip.sphere_inf == doctest::Approx(21.8));
    CHECK(saip.saip);
  }
}

TEST_CASE("horizon-market saip for fixed costs") {
  auto make_fixed = [](double bid, double ask, double fee,
                       std::vector<std::vector<double>> factors) {
    Instance inst;
    inst.market = std::make_shared<FixedCostModel>(1);
    inst.initial_state = shtest::fc_state(bid, ask, fee);
    inst.support = SupportModel::multiplicative(std::move(factors));
    inst.payoff = Payoff::zero();
    inst.horizon = 1;
    inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
    return inst;
  };

  SUBCASE("mid support around the spread: positive horizon infimum") {
    // bid 9 / ask 10 with fee 1; the mid 9.5 moves to {8, 12}.
    auto inst = make_fixed(9.0, 10.0, 1.0,
                           {{8.0 / 9.5, 8.0 / 9.5, 1.0},
                            {12.0 / 9.5, 12.0 / 9.5, 1.0}});
    Solver solver(inst);
    REQUIRE(solver.uses_horizon_radius());
    const auto hs = check_saip(*solver.horizon_zero_solve(),
                               *solver.horizon_model(), inst.grid, 0, 1e-8,
                               1e-8, 128);
    CHECK(hs.sphere_inf > 0.0);
    CHECK(hs.saip);
  }
  SUBCASE("zero spread and zero fee reduces to the frictionless check") {
    auto inst = make_fixed(10.0, 10.0, 0.0, {{0.8, 0.8, 1.0}, {1.2, 1.2, 1.0}});
    Solver solver(inst);
    const auto hs = check_saip(*solver.horizon_zero_solve(),
                               *solver.horizon_model(), inst.grid, 0, 1e-8,
                               1e-8, 128);
    CHECK(hs.sphere_inf == doctest::Approx(2.0));  // min(10-8, 12-10)
    CHECK(hs.saip);
  }
  SUBCASE("single successor pinned at the ask degenerates") {
    auto inst = make_fixed(9.0, 10.0, 1.0, {{10.0 / 9.0, 1.0, 1.0}});
    Solver solver(inst);
    const auto hs = check_saip(*solver.horizon_zero_solve(),
                               *solver.horizon_model(), inst.grid, 0, 1e-8,
                               1e-8, 128);
    CHECK(std::fabs(hs.sphere_inf) <= 1e-9);
    CHECK_FALSE(hs.saip);
  }
}

TEST_CASE("null space estimation") {
  SUBCASE("saip-true market has a trivial null space") {
    Instance inst;
    inst.market = std::make_shared<ProportionalModel>(1);
    inst.initial_state = shtest::prop_state(99.0, 101.0);
    inst.support = SupportModel::multiplicative({{0.8, 0.8}, {1.2, 1.2}});
    inst.payoff = Payoff::zero();
    inst.horizon = 1;
    inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
    Solver solver(inst);
    const auto ns =
        estimate_null_space(*solver.zero_solve(), *inst.market, inst.grid, 0, 1e-8, 128);
    CHECK(ns.basis.empty());
    CHECK(ns.laip);
  }
  SUBCASE("a redundant frictionless asset spans the null space") {
    // Asset 2 trades at a constant frictionless price in every state.
    Instance inst;
    inst.market = std::make_shared<ProportionalModel>(2);
    inst.initial_state = MarketState{{100.0, 100.0, 50.0, 50.0}};
    inst.support = SupportModel::multiplicative(
        {{0.8, 0.8, 1.0, 1.0}, {1.2, 1.2, 1.0, 1.0}});
    inst.payoff = Payoff::zero();
    inst.horizon = 1;
    inst.grid = PositionGrid({-2.0, -2.0}, {2.0, 2.0}, {0.25, 0.25});
    Solver solver(inst);
    const auto ns =
        estimate_null_space(*solver.zero_solve(), *inst.market, inst.grid, 0, 1e-8, 64);
    REQUIRE(ns.basis.size() == 1);
    CHECK(std::fabs(ns.basis[0][0]) <= 1e-9);
    CHECK(std::fabs(std::fabs(ns.basis[0][1]) - 1.0) <= 1e-9);
    CHECK(ns.laip);
  }
  SUBCASE("asymmetric zero direction breaks linearity") {
    auto inst = frictionless_binomial(120.0, 80.0 / 120.0, 1.0, Payoff::zero(), 1);
    Solver solver(inst);
    const auto zero = solver.zero_solve();
    // Shorting at the support maximum is free (cover at <= 120), buying is
    // not: exactly one direction of the pair has zero cost.
    CHECK(d_zero_value(*zero, *inst.market, inst.grid, 0, 0, std::vector<double>{-1.0}) ==
          doctest::Approx(0.0));
    CHECK(d_zero_value(*zero, *inst.market, inst.grid, 0, 0, std::vector<double>{1.0}) ==
          doctest::Approx(40.0));
    const auto ns = estimate_null_space(*zero, *inst.market, inst.grid, 0, 1e-8, 128);
    CHECK_FALSE(ns.laip);
  }
  SUBCASE("not applicable without sub-additivity") {
    Instance inst;
    inst.market = std::make_shared<OrderBookModel>(1, 2);
    inst.initial_state = shtest::ob2_state(99.5, 99.0, 5.0, 100.5, 101.0, 5.0);
    inst.support = SupportModel::multiplicative(
        {std::vector<double>(6, 0.9), std::vector<double>(6, 1.1)});
    inst.payoff = Payoff::zero();
    inst.horizon = 1;
    inst.grid = PositionGrid({-2.0}, {2.0}, {0.25});
    Solver solver(inst);
    CHECK_THROWS_AS(estimate_null_space(*solver.zero_solve(), *inst.market,
                                        inst.grid, 0, 1e-8, 128),
                    NotApplicable);
  }
}

TEST_CASE("report keeps the implication chain consistent") {
  std::mt19937 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = shtest::random_small_instance(rng);
    Solver solver(inst);
    const auto report = check_arbitrage(solver);
    for (const auto& d : report.times) {
      if (d.saip.has_value() && *d.saip) {
        CHECK(d.aip);
        if (d.laip_applicable) CHECK(*d.laip);
      }
      if (d.laip_applicable && d.laip.has_value() && *d.laip) CHECK(d.aip);
    }
  }
}

TEST_CASE("aip implies finite zero-claim values on the grid") {
  // Conic sub-additive market under AIP: no cell of the zero solve may sit
  // at -inf (nor, on a compact grid, below the boundary-trade bound).
  Instance inst;
  inst.market = std::make_shared<ProportionalModel>(1);
  inst.initial_state = shtest::prop_state(99.0, 101.0);
  inst.support = SupportModel::multiplicative({{0.8, 0.8}, {1.2, 1.2}});
  inst.payoff = Payoff::zero();
  inst.horizon = 2;
  inst.grid = PositionGrid({-2.0}, {2.0}, {0.125});
  Solver solver(inst);
  const auto zero = solver.zero_solve();
  REQUIRE(check_aip(*zero, inst.grid, 0, 1e-8).aip);
  for (const auto& layer : zero->layers)
    for (const auto& row : layer.gamma)
      for (double x : row) CHECK(std::isfinite(x));
}

TEST_CASE("three-dimensional sphere samples are unit, nested, and axis-complete") {
  const auto small = sphere_sample(3, 32);
  const auto big = sphere_sample(3, 64);
  REQUIRE(small.size() == 32);
  REQUIRE(big.size() == 64);
  for (std::size_t i = 0; i < small.size(); ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(big[i][j] == small[i][j]);
  int axis_hits = 0;
  for (const auto& dir : big) {
    double norm2 = 0.0;
    int nonzero = 0;
    for (double x : dir) {
      norm2 += x * x;
      if (x != 0.0) ++nonzero;
    }
    CHECK(std::sqrt(norm2) == doctest::Approx(1.0).epsilon(1e-12));
    if (nonzero == 1) ++axis_hits;
  }
  CHECK(axis_hits >= 6);  // +-e_1, +-e_2, +-e_3 are always present
}

TEST_CASE("sphere sampling is prefix-nested so the infimum is monotone") {
  Instance inst;
  inst.market = std::make_shared<ProportionalModel>(2);
  inst.initial_state = MarketState{{99.0, 101.0, 49.0, 51.0}};
  inst.support = SupportModel::multiplicative(
      {{0.8, 0.8, 0.9, 0.9}, {1.2, 1.2, 1.15, 1.15}});
  inst.payoff = Payoff::zero();
  inst.horizon = 1;
  inst.grid = PositionGrid({-2.0, -2.0}, {2.0, 2.0}, {0.25, 0.25});
  Solver solver(inst);
  const auto zero = solver.zero_solve();

  const auto coarse = sphere_sample(2, 64);
  const auto fine = sphere_sample(2, 128);
  REQUIRE(fine.size() >= coarse.size());
  for (std::size_t i = 0; i < coarse.size(); ++i)
    for (std::size_t j = 0; j < coarse[i].size(); ++j)
      REQUIRE(fine[i][j] == coarse[i][j]);

  const double i64 =
      check_saip(*zero, *inst.market, inst.grid, 0, 1e-8, 1e-8, 64).sphere_inf;
  const double i128 =
      check_saip(*zero, *inst.market, inst.grid, 0, 1e-8, 1e-8, 128).sphere_inf;
  CHECK(i128 <= i64 + 1e-15);

  for (const auto& dir : fine) {
    double norm = 0.0;
    for (double x : dir) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
