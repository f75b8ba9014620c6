#pragma once

#include <cstdint>
#include <vector>

#include "superhedge/common.hpp"
#include "superhedge/cost_model.hpp"
#include "superhedge/market_state.hpp"

namespace superhedge {

enum class PayoffKind {
  Zero,
  CashSettledCall,
  CashSettledPut,
  PhysicalCall,
  Basket,
  CustomTable,
};

/// European claim g(S_T) with values in R^d_+. Cash-settled kinds read the
/// model's reference price (mid of best bid/ask for the built-in markets).
class Payoff {
 public:
  static Payoff zero();
  static Payoff cash_call(double strike, int asset = 0);
  static Payoff cash_put(double strike, int asset = 0);
  /// Physical delivery with the strike prepaid: pays (0, 1_{price >= K}).
  /// The unpaid-strike convention has a negative cash leg and is rejected.
  static Payoff physical_call(double strike, int asset, bool strike_prepaid);
  static Payoff basket_call(std::vector<double> weights, double strike);
  /// Explicit payoff vector per terminal node id. Values must be >= 0.
  static Payoff custom_table(std::vector<Position> by_terminal_node);

  PayoffKind kind() const { return kind_; }
  bool is_zero() const { return kind_ == PayoffKind::Zero; }
  double strike() const { return strike_; }

  /// g(s) for terminal node `node_id`; throws NegativePayoff when a table
  /// value has a negative coordinate.
  Position value(const CostModel& market, const MarketState& s,
                 std::uint32_t node_id) const;

 private:
  PayoffKind kind_ = PayoffKind::Zero;
  double strike_ = 0.0;
  int asset_ = 0;
  std::vector<double> weights_;
  std::vector<Position> table_;
};

}  // namespace superhedge
