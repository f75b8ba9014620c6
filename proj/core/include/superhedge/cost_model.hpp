#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "superhedge/common.hpp"
#include "superhedge/market_state.hpp"

namespace superhedge {

/// Monotone bijection delta on [0,inf] with delta(0)=0, delta(inf)=inf.
/// Built-ins use the identity; custom models may supply a tabulated law
/// (linear interpolation between knots, linear extrapolation past the last).
class DeltaLaw {
 public:
  static DeltaLaw identity();
  static DeltaLaw from_table(std::vector<std::pair<double, double>> knots);

  double operator()(double lambda) const;
  double inverse(double value) const;
  bool is_identity() const { return knots_.empty(); }

 private:
  // Empty knots == identity.
  std::vector<std::pair<double, double>> knots_;
};

/// Structural properties a cost model declares about itself. The solver uses
/// them to pick a valid search-radius bound; the property probe verifies them
/// on samples.
struct CostFlags {
  bool convex = false;
  bool sub_additive = false;
  bool super_additive = false;
  /// Declared super delta-homogeneity law: C(s, lambda*z) >= delta(lambda)*C(s, z)
  /// for lambda >= 1. Unset when the model has no such law (e.g. fixed costs).
  std::optional<DeltaLaw> delta;
  /// |C(s, x+w) - C(s, x)| <= h(s, w) for all x, w. Holds for the built-ins
  /// and lets non-sub-additive convex models (order books) use the radius
  /// bound.
  bool h_bounds_increments = false;
  /// The horizon (conic-hull) market dominates: horizon_cost <= cost, so the
  /// enlarged market's sphere infimum bounds the search radius.
  bool horizon_dominates = false;
};

enum class CostModelKind { OrderBook, Proportional, FixedCost, Custom };

/// One side of an order book extracted from a market state. The last level is
/// infinitely deep; `cumulative[j]` is the total quantity through level j.
struct OrderBookSide {
  std::vector<double> prices;
  std::vector<double> quantities;  // size prices.size(), last entry +inf
  std::vector<double> cumulative;  // running sums, last entry +inf
};

/// Time-indexed family of cost functions C_t(s, z): the minimal cash needed at
/// time t, in market state s, to acquire the bundle z. Cash invariance
/// C(s, z + lambda*e1) = C(s, z) + lambda holds by construction: implementations
/// provide the risky-only part and the cash coordinate is added on top.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual CostModelKind kind() const = 0;
  virtual int risky_assets() const = 0;  // d - 1
  virtual int state_dim() const = 0;     // m

  /// Throws InvalidState / LayoutMismatch when s violates the model's layout.
  virtual void validate_state(const MarketState& s) const = 0;

  /// Cost of the risky part only: C_t(s, (0, risky)).
  virtual double cost_risky(int t, const MarketState& s,
                            std::span<const double> risky) const = 0;

  /// Dominating bound on the risky part: |C_t(s, (0, risky))| <= value.
  virtual double cost_bound_risky(int t, const MarketState& s,
                                  std::span<const double> risky) const = 0;

  /// Horizon (conic-hull) cost of the risky part; closed form for built-ins,
  /// numeric liminf over a geometric alpha-schedule by default.
  virtual double horizon_cost_risky(int t, const MarketState& s,
                                    std::span<const double> risky) const;

  /// Single-asset batch of cost_risky over candidates y[i] - v; bit-identical
  /// to the scalar path. Overridden by the built-ins to hoist per-call work
  /// out of the solver's inner loop.
  virtual void cost_risky_row(int t, const MarketState& s, const double* y,
                              std::size_t n, double v, double* out) const;

  /// Reference price of one risky asset (used by payoff evaluators);
  /// mid of best bid/ask for the built-ins.
  virtual double ref_price(const MarketState& s, int asset) const = 0;

  const CostFlags& flags() const { return flags_; }

  double cost(int t, const MarketState& s, const Position& z) const {
    check_layout(s, z);
    return z.cash + cost_risky(t, s, z.risky);
  }
  double liquidation(int t, const MarketState& s, const Position& z) const {
    return -cost(t, s, -z);
  }
  double horizon_cost(int t, const MarketState& s, const Position& z) const {
    check_layout(s, z);
    return z.cash + horizon_cost_risky(t, s, z.risky);
  }
  /// h_t(s, z) with the cash part included.
  double cost_bound(int t, const MarketState& s, const Position& z) const {
    check_layout(s, z);
    return std::fabs(z.cash) + cost_bound_risky(t, s, z.risky);
  }

 protected:
  void check_layout(const MarketState& s, const Position& z) const;
  CostFlags flags_;
};

/// Proportional bid/ask model. State layout per asset i (block of 2):
/// [2i] bid price, [2i+1] ask price, with 0 < bid <= ask.
class ProportionalModel final : public CostModel {
 public:
  explicit ProportionalModel(int risky_assets);

  CostModelKind kind() const override { return CostModelKind::Proportional; }
  int risky_assets() const override { return assets_; }
  int state_dim() const override { return 2 * assets_; }
  void validate_state(const MarketState& s) const override;
  double cost_risky(int t, const MarketState& s,
                    std::span<const double> risky) const override;
  double cost_bound_risky(int t, const MarketState& s,
                          std::span<const double> risky) const override;
  double horizon_cost_risky(int t, const MarketState& s,
                            std::span<const double> risky) const override;
  void cost_risky_row(int t, const MarketState& s, const double* y,
                      std::size_t n, double v, double* out) const override;
  double ref_price(const MarketState& s, int asset) const override;

  double bid(const MarketState& s, int asset) const { return s[2 * asset]; }
  double ask(const MarketState& s, int asset) const { return s[2 * asset + 1]; }

 private:
  int assets_;
};

/// Order-book model with a fixed number of levels per side. State layout per
/// asset i (block of 4k-2, k = levels):
///   [0, k)        bid prices, strictly decreasing
///   [k, 2k-1)     bid quantities for levels 1..k-1 (level k is infinite)
///   [2k-1, 3k-1)  ask prices, strictly increasing
///   [3k-1, 4k-2)  ask quantities for levels 1..k-1
class OrderBookModel final : public CostModel {
 public:
  OrderBookModel(int risky_assets, int levels);

  CostModelKind kind() const override { return CostModelKind::OrderBook; }
  int risky_assets() const override { return assets_; }
  int state_dim() const override { return assets_ * block_size(); }
  void validate_state(const MarketState& s) const override;
  double cost_risky(int t, const MarketState& s,
                    std::span<const double> risky) const override;
  double cost_bound_risky(int t, const MarketState& s,
                          std::span<const double> risky) const override;
  double horizon_cost_risky(int t, const MarketState& s,
                            std::span<const double> risky) const override;
  void cost_risky_row(int t, const MarketState& s, const double* y,
                      std::size_t n, double v, double* out) const override;
  double ref_price(const MarketState& s, int asset) const override;

  int levels() const { return levels_; }
  int block_size() const { return 4 * levels_ - 2; }
  OrderBookSide bid_side(const MarketState& s, int asset) const;
  OrderBookSide ask_side(const MarketState& s, int asset) const;

 private:
  int assets_;
  int levels_;
};

/// Fixed-cost model. State layout per asset i (block of 3):
/// [3i] bid, [3i+1] ask, [3i+2] fixed cost c >= 0.
/// Liquidation of y > 0 units pays (y*bid - c)^+; buying y > 0 costs y*ask + c.
class FixedCostModel final : public CostModel {
 public:
  explicit FixedCostModel(int risky_assets);

  CostModelKind kind() const override { return CostModelKind::FixedCost; }
  int risky_assets() const override { return assets_; }
  int state_dim() const override { return 3 * assets_; }
  void validate_state(const MarketState& s) const override;
  double cost_risky(int t, const MarketState& s,
                    std::span<const double> risky) const override;
  double cost_bound_risky(int t, const MarketState& s,
                          std::span<const double> risky) const override;
  double horizon_cost_risky(int t, const MarketState& s,
                            std::span<const double> risky) const override;
  void cost_risky_row(int t, const MarketState& s, const double* y,
                      std::size_t n, double v, double* out) const override;
  double ref_price(const MarketState& s, int asset) const override;

  double bid(const MarketState& s, int asset) const { return s[3 * asset]; }
  double ask(const MarketState& s, int asset) const { return s[3 * asset + 1]; }
  double fixed_fee(const MarketState& s, int asset) const {
    return s[3 * asset + 2];
  }

 private:
  int assets_;
};

/// User-defined cost model: callables plus declared flags. The risky-only
/// callable receives (t, s, risky); cash invariance is added structurally.
class CustomModel final : public CostModel {
 public:
  using CostFn =
      std::function<double(int, const MarketState&, std::span<const double>)>;
  using PriceFn = std::function<double(const MarketState&, int)>;

  CustomModel(int risky_assets, int state_dim, CostFn cost, CostFn bound,
              CostFlags flags, PriceFn ref_price = {});

  CostModelKind kind() const override { return CostModelKind::Custom; }
  int risky_assets() const override { return assets_; }
  int state_dim() const override { return state_dim_; }
  void validate_state(const MarketState& s) const override;
  double cost_risky(int t, const MarketState& s,
                    std::span<const double> risky) const override;
  double cost_bound_risky(int t, const MarketState& s,
                          std::span<const double> risky) const override;
  double ref_price(const MarketState& s, int asset) const override;

 private:
  int assets_;
  int state_dim_;
  CostFn cost_;
  CostFn bound_;
  PriceFn price_;
};

/// Wraps a base model so that cost() evaluates the base model's horizon cost.
/// Used for the enlarged conic market of fixed-cost models.
class HorizonModel final : public CostModel {
 public:
  explicit HorizonModel(std::shared_ptr<const CostModel> base);

  CostModelKind kind() const override { return base_->kind(); }
  int risky_assets() const override { return base_->risky_assets(); }
  int state_dim() const override { return base_->state_dim(); }
  void validate_state(const MarketState& s) const override {
    base_->validate_state(s);
  }
  double cost_risky(int t, const MarketState& s,
                    std::span<const double> risky) const override {
    return base_->horizon_cost_risky(t, s, risky);
  }
  double cost_bound_risky(int t, const MarketState& s,
                          std::span<const double> risky) const override {
    return base_->cost_bound_risky(t, s, risky);
  }
  double horizon_cost_risky(int t, const MarketState& s,
                            std::span<const double> risky) const override {
    return base_->horizon_cost_risky(t, s, risky);
  }
  double ref_price(const MarketState& s, int asset) const override {
    return base_->ref_price(s, asset);
  }

 private:
  std::shared_ptr<const CostModel> base_;
};

/// One axiom check: name, whether it was run, and the worst violation seen.
struct AxiomResult {
  std::string name;
  bool checked = false;
  bool passed = false;
  double worst_violation = 0.0;
  std::string note;
};

struct PropertyReport {
  std::vector<AxiomResult> axioms;

  const AxiomResult* find(const std::string& name) const;
  bool all_passed() const;
};

/// Samples the declared axioms of a cost model: C(s,0)=0, cash invariance,
/// |C| <= h, sub/super-additivity when declared, super delta-homogeneity
/// (with the declared law, identity otherwise), and monotonicity w.r.t. R^d_+.
PropertyReport probe_properties(const CostModel& model, int t,
                                const std::vector<MarketState>& sample_states,
                                const std::vector<Position>& sample_positions,
                                double abs_tol = 1e-9, double rel_tol = 1e-9);

}  // namespace superhedge
