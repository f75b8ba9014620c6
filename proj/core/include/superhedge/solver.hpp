#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "superhedge/cost_model.hpp"
#include "superhedge/grid.hpp"
#include "superhedge/market_state.hpp"
#include "superhedge/payoff.hpp"
#include "superhedge/support_model.hpp"
#include "superhedge/value_layer.hpp"

namespace superhedge {

/// A complete pricing problem: market, scenario model, claim, start state,
/// horizon and the position grid the backward recursion runs on.
struct Instance {
  std::shared_ptr<const CostModel> market;
  SupportModel support;
  Payoff payoff;
  MarketState initial_state;
  int horizon = 1;
  PositionGrid grid;
  std::size_t node_cap = 1'000'000;
};

struct SolverOptions {
  int threads = 0;  // 0 = hardware concurrency
  /// Restrict candidate actions to the theory-backed ball around 0. Only an
  /// optimization: trimmed candidates are provably suboptimal.
  bool restrict_by_radius = true;
  /// Radius used when the sphere infimum degenerates (i_t <= epsilon).
  /// Unset + fallback_auto=false means RadiusDegenerate is thrown instead.
  std::optional<double> fallback_radius;
  bool fallback_auto = true;
  double radius_epsilon = 1e-10;
  /// Restrict candidate actions to the orthogonal complement of the certified
  /// zero-cost direction space. Engaged per layer only for sub-additive
  /// markets whose estimated null space is axis-aligned, where dropping the
  /// free coordinates is exact on the grid.
  bool use_null_space_reduction = false;
};

struct LayerStats {
  int t = 0;
  double gamma_min = kInf;
  double gamma_max = -kInf;
  /// Axes dropped from the candidate set by the null-space reduction.
  std::size_t null_axes_dropped = 0;
  /// Sphere infimum i_t backing the radius (NaN when no radius path applies).
  double sphere_inf = std::numeric_limits<double>::quiet_NaN();
  bool used_horizon_sphere = false;
  bool fallback_engaged = false;
  double radius_min = kInf;
  double radius_max = -kInf;
  double avg_candidates = 0.0;
  std::size_t boundary_argmin = 0;
};

struct Diagnostics {
  std::vector<LayerStats> layers;  // index t = 0..T
};

struct SolveResult {
  double price = kInf;
  std::vector<ValueLayer> layers;  // index t = 0..T
  HedgePolicy policy;
  Diagnostics diagnostics;
  std::shared_ptr<const SupportLattice> lattice;
  /// Zero-claim solve backing the radius and the arbitrage checks
  /// (null when this result is itself a zero-claim solve).
  std::shared_ptr<const SolveResult> zero_solve;
  /// Zero-claim solve of the enlarged (horizon) market, when one was needed.
  std::shared_ptr<const SolveResult> horizon_zero;
};

/// D_t^0(s, 0, z): one-step cost of the unit risky direction z against the
/// zero claim, theta interpolated multilinearly. `model` must be the model
/// `zero` was solved under.
double d_zero_value(const SolveResult& zero, const CostModel& model,
                    const PositionGrid& grid, int t, std::uint32_t node,
                    std::span<const double> z_risky, bool* clamped = nullptr);

/// Backward dynamic-programming solver. Zero-claim solves (plain market and,
/// for fixed-cost style models, the enlarged conic market) are memoized per
/// instance, matching (cost model, support model, grid).
class Solver {
 public:
  explicit Solver(Instance instance, SolverOptions options = {});

  const Instance& instance() const { return instance_; }
  const SolverOptions& options() const { return options_; }
  const SupportLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const SupportLattice> lattice_ptr() const { return lattice_; }

  /// Prices instance().payoff. Throws NotHedgeable when gamma_0(root, 0)
  /// is +inf; RadiusDegenerate when SAIP fails numerically and no fallback
  /// radius is available.
  SolveResult solve();

  std::shared_ptr<const SolveResult> zero_solve();
  std::shared_ptr<const SolveResult> horizon_zero_solve();
  std::shared_ptr<const CostModel> horizon_model() const { return horizon_model_; }

  /// True when this market's radius bound must come from the enlarged conic
  /// market (declared horizon domination without a delta law).
  bool uses_horizon_radius() const;

 private:
  SolveResult run(const CostModel& model, const Payoff& payoff,
                  const SolveResult* sphere_zero, const CostModel* sphere_model,
                  bool sphere_from_self, const SolveResult* null_zero = nullptr);

  Instance instance_;
  SolverOptions options_;
  std::shared_ptr<const SupportLattice> lattice_;
  std::shared_ptr<const CostModel> horizon_model_;
  std::shared_ptr<const SolveResult> zero_;
  std::shared_ptr<const SolveResult> horizon_zero_;
};

struct PathReport {
  std::vector<std::uint32_t> nodes;        // node id per t = 0..T
  std::vector<std::size_t> position_cell;  // post-trade grid cell per t = 0..T-1
  std::vector<double> trade_costs;         // cash paid per rebalance
  double terminal_cash = 0.0;
  double shortfall = 0.0;  // liquidation value of V_T - payoff at the leaf
};

struct RolloutReport {
  std::vector<PathReport> paths;
  double worst_shortfall = kInf;
};

/// Simulates the recorded policy along every root-to-leaf path and checks
/// terminal super-replication: liquidation(V_T - payoff) per leaf.
RolloutReport rollout(const SolveResult& result, const Instance& instance,
                      double initial_cash, std::size_t path_cap = 1'000'000);

}  // namespace superhedge
