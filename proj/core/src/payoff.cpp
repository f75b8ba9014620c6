#include "superhedge/payoff.hpp"

#include <cmath>
#include <sstream>

namespace superhedge {

Payoff Payoff::zero() { return Payoff{}; }

Payoff Payoff::cash_call(double strike, int asset) {
  Payoff p;
  p.kind_ = PayoffKind::CashSettledCall;
  p.strike_ = strike;
  p.asset_ = asset;
  return p;
}

Payoff Payoff::cash_put(double strike, int asset) {
  Payoff p;
  p.kind_ = PayoffKind::CashSettledPut;
  p.strike_ = strike;
  p.asset_ = asset;
  return p;
}

Payoff Payoff::physical_call(double strike, int asset, bool strike_prepaid) {
  if (!strike_prepaid)
    throw ConfigError(
        "physical call without prepaid strike has a negative cash leg; "
        "payoffs must be componentwise nonnegative");
  Payoff p;
  p.kind_ = PayoffKind::PhysicalCall;
  p.strike_ = strike;
  p.asset_ = asset;
  return p;
}

Payoff Payoff::basket_call(std::vector<double> weights, double strike) {
  if (weights.empty()) throw ConfigError("basket needs weights");
  Payoff p;
  p.kind_ = PayoffKind::Basket;
  p.strike_ = strike;
  p.weights_ = std::move(weights);
  return p;
}

Payoff Payoff::custom_table(std::vector<Position> by_terminal_node) {
  if (by_terminal_node.empty()) throw ConfigError("payoff table is empty");
  Payoff p;
  p.kind_ = PayoffKind::CustomTable;
  p.table_ = std::move(by_terminal_node);
  return p;
}

Position Payoff::value(const CostModel& market, const MarketState& s,
                       std::uint32_t node_id) const {
  const int assets = market.risky_assets();
  if ((kind_ == PayoffKind::CashSettledCall ||
       kind_ == PayoffKind::CashSettledPut ||
       kind_ == PayoffKind::PhysicalCall) &&
      (asset_ < 0 || asset_ >= assets)) {
    std::ostringstream os;
    os << "payoff references asset " << asset_ << ", the market has " << assets
       << " risky assets";
    throw LayoutMismatch(os.str());
  }
  Position g = Position::zero(assets);
  switch (kind_) {
    case PayoffKind::Zero:
      break;
    case PayoffKind::CashSettledCall:
      g.cash = std::fmax(market.ref_price(s, asset_) - strike_, 0.0);
      break;
    case PayoffKind::CashSettledPut:
      g.cash = std::fmax(strike_ - market.ref_price(s, asset_), 0.0);
      break;
    case PayoffKind::PhysicalCall:
      if (market.ref_price(s, asset_) >= strike_) g.risky[asset_] = 1.0;
      break;
    case PayoffKind::Basket: {
      if (static_cast<int>(weights_.size()) != assets)
        throw LayoutMismatch("basket weights do not match the asset count");
      double level = 0.0;
      for (int i = 0; i < assets; ++i)
        level += weights_[i] * market.ref_price(s, i);
      g.cash = std::fmax(level - strike_, 0.0);
      break;
    }
    case PayoffKind::CustomTable: {
      if (node_id >= table_.size()) {
        std::ostringstream os;
        os << "payoff table has no entry for terminal node " << node_id;
        throw ConfigError(os.str());
      }
      g = table_[node_id];
      if (static_cast<int>(g.risky.size()) != assets)
        throw LayoutMismatch("payoff table row does not match the asset count");
      if (g.cash < 0.0) throw NegativePayoff("negative cash payoff in table");
      for (double x : g.risky)
        if (x < 0.0) throw NegativePayoff("negative risky payoff in table");
      break;
    }
  }
  return g;
}

}  // namespace superhedge
