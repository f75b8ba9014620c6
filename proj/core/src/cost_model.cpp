#include "superhedge/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace superhedge {

// ---------------------------------------------------------------------------
// DeltaLaw

DeltaLaw DeltaLaw::identity() { return DeltaLaw{}; }

DeltaLaw DeltaLaw::from_table(std::vector<std::pair<double, double>> knots) {
  std::sort(knots.begin(), knots.end());
  if (knots.empty() || knots.front().first > 0.0)
    knots.insert(knots.begin(), {0.0, 0.0});
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].first <= knots[i - 1].first ||
        knots[i].second <= knots[i - 1].second)
      throw ConfigError("delta law knots must be strictly increasing in both coordinates");
  }
  if (knots.size() < 2)
    throw ConfigError("delta law needs at least one knot beyond (0,0)");
  DeltaLaw law;
  law.knots_ = std::move(knots);
  return law;
}

namespace {
double interp_monotone(const std::vector<std::pair<double, double>>& knots,
                       double x, bool inverse) {
  auto key = [&](const std::pair<double, double>& k) {
    return inverse ? k.second : k.first;
  };
  auto val = [&](const std::pair<double, double>& k) {
    return inverse ? k.first : k.second;
  };
  if (x <= key(knots.front())) return val(knots.front());
  std::size_t hi = 1;
  while (hi < knots.size() && key(knots[hi]) < x) ++hi;
  if (hi == knots.size()) {
    // Extrapolate with the last segment's slope.
    const auto& a = knots[knots.size() - 2];
    const auto& b = knots[knots.size() - 1];
    const double slope = (val(b) - val(a)) / (key(b) - key(a));
    return val(b) + slope * (x - key(b));
  }
  const auto& a = knots[hi - 1];
  const auto& b = knots[hi];
  const double w = (x - key(a)) / (key(b) - key(a));
  return val(a) + w * (val(b) - val(a));
}
}  // namespace

double DeltaLaw::operator()(double lambda) const {
  if (is_identity()) return lambda;
  if (std::isinf(lambda)) return kInf;
  return interp_monotone(knots_, lambda, /*inverse=*/false);
}

double DeltaLaw::inverse(double value) const {
  if (is_identity()) return value;
  if (std::isinf(value)) return kInf;
  return interp_monotone(knots_, value, /*inverse=*/true);
}

// ---------------------------------------------------------------------------
// CostModel base

void CostModel::check_layout(const MarketState& s, const Position& z) const {
  if (static_cast<int>(s.dim()) != state_dim()) {
    std::ostringstream os;
    os << "market state has " << s.dim() << " coordinates, model expects "
       << state_dim();
    throw LayoutMismatch(os.str());
  }
  if (static_cast<int>(z.risky.size()) != risky_assets()) {
    std::ostringstream os;
    os << "position has " << z.risky.size() << " risky coordinates, model expects "
       << risky_assets();
    throw LayoutMismatch(os.str());
  }
}

double CostModel::horizon_cost_risky(int t, const MarketState& s,
                                     std::span<const double> risky) const {
  // liminf_{alpha->inf} C(s, alpha*y)/alpha over alpha = 2^k, k = 4..20.
  // Returns the smallest tail average; oscillation that does not settle is an
  // error.
  std::vector<double> q;
  std::vector<double> scaled(risky.begin(), risky.end());
  for (int k = 4; k <= 20; ++k) {
    const double alpha = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < risky.size(); ++i) scaled[i] = alpha * risky[i];
    q.push_back(cost_risky(t, s, scaled) / alpha);
  }
  const double tol = 1e-9 * (1.0 + std::fabs(q.back()));
  const std::size_t n = q.size();
  const double d1 = std::fabs(q[n - 1] - q[n - 2]);
  const double d2 = std::fabs(q[n - 2] - q[n - 3]);
  const double d3 = std::fabs(q[n - 3] - q[n - 4]);
  // Either the tail is flat or the successive gaps are genuinely shrinking.
  const bool settling = d1 <= tol || (d1 < 0.9 * d2 && d2 < 0.9 * d3);
  if (!settling)
    throw NonConvergent("horizon cost estimate oscillates across the alpha-schedule");
  double best = kInf;
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = j; i < n; ++i) sum += q[i];
    best = std::min(best, sum / static_cast<double>(n - j));
  }
  return best;
}

void CostModel::cost_risky_row(int t, const MarketState& s, const double* y,
                               std::size_t n, double v, double* out) const {
  for (std::size_t i = 0; i < n; ++i) {
    const double z = y[i] - v;
    out[i] = cost_risky(t, s, std::span<const double>(&z, 1));
  }
}

// ---------------------------------------------------------------------------
// ProportionalModel

ProportionalModel::ProportionalModel(int risky_assets) : assets_(risky_assets) {
  if (risky_assets < 1) throw ConfigError("need at least one risky asset");
  flags_.convex = true;
  flags_.sub_additive = true;
  flags_.delta = DeltaLaw::identity();
  flags_.h_bounds_increments = true;
  flags_.horizon_dominates = true;  // conic: horizon cost equals cost
}

void ProportionalModel::validate_state(const MarketState& s) const {
  if (static_cast<int>(s.dim()) != state_dim())
    throw LayoutMismatch("proportional state must hold (bid, ask) per asset");
  for (int i = 0; i < assets_; ++i) {
    const double b = bid(s, i), a = ask(s, i);
    if (!(b > 0.0) || !(a > 0.0) || !is_finite(b) || !is_finite(a))
      throw InvalidState("prices must be positive and finite");
    if (b > a) throw InvalidState("bid exceeds ask");
  }
}

double ProportionalModel::cost_risky(int, const MarketState& s,
                                     std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const double y = risky[i];
    total += y >= 0.0 ? y * ask(s, i) : y * bid(s, i);
  }
  return total;
}

double ProportionalModel::cost_bound_risky(int, const MarketState& s,
                                           std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i)
    total += (bid(s, i) + ask(s, i)) * std::fabs(risky[i]);
  return total;
}

double ProportionalModel::horizon_cost_risky(int t, const MarketState& s,
                                             std::span<const double> risky) const {
  return cost_risky(t, s, risky);
}

void ProportionalModel::cost_risky_row(int, const MarketState& s,
                                       const double* y, std::size_t n, double v,
                                       double* out) const {
  const double b = bid(s, 0), a = ask(s, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = y[i] - v;
    out[i] = z >= 0.0 ? z * a : z * b;
  }
}

double ProportionalModel::ref_price(const MarketState& s, int asset) const {
  return 0.5 * (bid(s, asset) + ask(s, asset));
}

// ---------------------------------------------------------------------------
// OrderBookModel

OrderBookModel::OrderBookModel(int risky_assets, int levels)
    : assets_(risky_assets), levels_(levels) {
  if (risky_assets < 1) throw ConfigError("need at least one risky asset");
  if (levels < 1) throw ConfigError("order book needs at least one level");
  flags_.convex = true;
  flags_.delta = DeltaLaw::identity();
  flags_.h_bounds_increments = true;
}

namespace {
OrderBookSide extract_side(const MarketState& s, int offset, int levels) {
  OrderBookSide side;
  side.prices.assign(s.coords.begin() + offset, s.coords.begin() + offset + levels);
  side.quantities.assign(s.coords.begin() + offset + levels,
                         s.coords.begin() + offset + 2 * levels - 1);
  side.quantities.push_back(kInf);
  side.cumulative.resize(levels);
  double run = 0.0;
  for (int j = 0; j + 1 < levels; ++j) {
    run += side.quantities[j];
    side.cumulative[j] = run;
  }
  side.cumulative[levels - 1] = kInf;
  return side;
}

// Cash for filling a positive quantity against one book side, walking levels
// in order. The terminal level is infinitely deep, so the loop always ends
// with a finite consumed quantity.
double walk_side(const OrderBookSide& side, double quantity) {
  double cash = 0.0;
  double remaining = quantity;
  for (std::size_t j = 0; j < side.prices.size(); ++j) {
    const double take = std::min(remaining, side.quantities[j]);
    cash += take * side.prices[j];
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return cash;
}
}  // namespace

OrderBookSide OrderBookModel::bid_side(const MarketState& s, int asset) const {
  return extract_side(s, asset * block_size(), levels_);
}

OrderBookSide OrderBookModel::ask_side(const MarketState& s, int asset) const {
  return extract_side(s, asset * block_size() + 2 * levels_ - 1, levels_);
}

void OrderBookModel::validate_state(const MarketState& s) const {
  if (static_cast<int>(s.dim()) != state_dim())
    throw LayoutMismatch("order-book state size does not match levels/assets");
  for (int i = 0; i < assets_; ++i) {
    const auto bids = bid_side(s, i);
    const auto asks = ask_side(s, i);
    for (int j = 0; j < levels_; ++j) {
      if (!(bids.prices[j] > 0.0) || !(asks.prices[j] > 0.0) ||
          !is_finite(bids.prices[j]) || !is_finite(asks.prices[j]))
        throw InvalidState("order-book prices must be positive and finite");
      if (j + 1 < levels_) {
        if (!(bids.prices[j] > bids.prices[j + 1]))
          throw InvalidState("bid prices must be strictly decreasing");
        if (!(asks.prices[j] < asks.prices[j + 1]))
          throw InvalidState("ask prices must be strictly increasing");
        if (!(bids.quantities[j] > 0.0) || !is_finite(bids.quantities[j]) ||
            !(asks.quantities[j] > 0.0) || !is_finite(asks.quantities[j]))
          throw InvalidState("order-book quantities must be positive and finite");
      }
    }
    if (!(bids.prices[0] < asks.prices[0]))
      throw InvalidState("best bid must be below best ask");
  }
}

double OrderBookModel::cost_risky(int, const MarketState& s,
                                  std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const double y = risky[i];
    if (y > 0.0)
      total += walk_side(ask_side(s, i), y);
    else if (y < 0.0)
      total -= walk_side(bid_side(s, i), -y);
  }
  return total;
}

double OrderBookModel::cost_bound_risky(int, const MarketState& s,
                                        std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const auto bids = bid_side(s, i);
    const auto asks = ask_side(s, i);
    double level_sum = 0.0;
    for (int j = 0; j < levels_; ++j) level_sum += bids.prices[j] + asks.prices[j];
    total += level_sum * std::fabs(risky[i]);
  }
  return total;
}

double OrderBookModel::horizon_cost_risky(int, const MarketState& s,
                                          std::span<const double> risky) const {
  // Deepest levels dominate as the traded quantity grows.
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const double y = risky[i];
    if (y > 0.0)
      total += y * ask_side(s, i).prices[levels_ - 1];
    else if (y < 0.0)
      total += y * bid_side(s, i).prices[levels_ - 1];
  }
  return total;
}

double OrderBookModel::ref_price(const MarketState& s, int asset) const {
  return 0.5 * (bid_side(s, asset).prices[0] + ask_side(s, asset).prices[0]);
}

void OrderBookModel::cost_risky_row(int, const MarketState& s, const double* y,
                                    std::size_t n, double v, double* out) const {
  const OrderBookSide bids = bid_side(s, 0);
  const OrderBookSide asks = ask_side(s, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = y[i] - v;
    if (z > 0.0)
      out[i] = walk_side(asks, z);
    else if (z < 0.0)
      out[i] = -walk_side(bids, -z);
    else
      out[i] = 0.0;
  }
}

// ---------------------------------------------------------------------------
// FixedCostModel

FixedCostModel::FixedCostModel(int risky_assets) : assets_(risky_assets) {
  if (risky_assets < 1) throw ConfigError("need at least one risky asset");
  flags_.sub_additive = true;
  flags_.h_bounds_increments = true;
  flags_.horizon_dominates = true;  // horizon drops the fixed fee
}

void FixedCostModel::validate_state(const MarketState& s) const {
  if (static_cast<int>(s.dim()) != state_dim())
    throw LayoutMismatch("fixed-cost state must hold (bid, ask, fee) per asset");
  for (int i = 0; i < assets_; ++i) {
    const double b = bid(s, i), a = ask(s, i), c = fixed_fee(s, i);
    if (!(b > 0.0) || !(a > 0.0) || !is_finite(b) || !is_finite(a))
      throw InvalidState("prices must be positive and finite");
    if (b > a) throw InvalidState("bid exceeds ask");
    if (!(c >= 0.0) || !is_finite(c)) throw InvalidState("fixed fee must be >= 0");
  }
}

double FixedCostModel::cost_risky(int, const MarketState& s,
                                  std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const double y = risky[i];
    if (y > 0.0) {
      total += y * ask(s, i) + fixed_fee(s, i);
    } else if (y < 0.0) {
      // Selling -y units liquidates at ((-y)*bid - c)^+.
      total -= std::max((-y) * bid(s, i) - fixed_fee(s, i), 0.0);
    }
  }
  return total;
}

double FixedCostModel::cost_bound_risky(int, const MarketState& s,
                                        std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i)
    total += (bid(s, i) + ask(s, i)) * std::fabs(risky[i]) + fixed_fee(s, i);
  return total;
}

double FixedCostModel::horizon_cost_risky(int, const MarketState& s,
                                          std::span<const double> risky) const {
  double total = 0.0;
  for (int i = 0; i < assets_; ++i) {
    const double y = risky[i];
    total += y >= 0.0 ? y * ask(s, i) : y * bid(s, i);
  }
  return total;
}

double FixedCostModel::ref_price(const MarketState& s, int asset) const {
  return 0.5 * (bid(s, asset) + ask(s, asset));
}

void FixedCostModel::cost_risky_row(int, const MarketState& s, const double* y,
                                    std::size_t n, double v, double* out) const {
  const double b = bid(s, 0), a = ask(s, 0), c = fixed_fee(s, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = y[i] - v;
    if (z > 0.0)
      out[i] = z * a + c;
    else if (z < 0.0)
      out[i] = -std::max((-z) * b - c, 0.0);
    else
      out[i] = 0.0;
  }
}

// ---------------------------------------------------------------------------
// CustomModel

CustomModel::CustomModel(int risky_assets, int state_dim, CostFn cost,
                         CostFn bound, CostFlags flags, PriceFn ref_price)
    : assets_(risky_assets),
      state_dim_(state_dim),
      cost_(std::move(cost)),
      bound_(std::move(bound)),
      price_(std::move(ref_price)) {
  if (!cost_ || !bound_)
    throw ConfigError("custom model needs cost and bound callables");
  flags_ = std::move(flags);
}

void CustomModel::validate_state(const MarketState& s) const {
  if (static_cast<int>(s.dim()) != state_dim_)
    throw LayoutMismatch("custom state dimension mismatch");
}

double CustomModel::cost_risky(int t, const MarketState& s,
                               std::span<const double> risky) const {
  return cost_(t, s, risky);
}

double CustomModel::cost_bound_risky(int t, const MarketState& s,
                                     std::span<const double> risky) const {
  return bound_(t, s, risky);
}

double CustomModel::ref_price(const MarketState& s, int asset) const {
  if (price_) return price_(s, asset);
  return s[asset];
}

// ---------------------------------------------------------------------------
// HorizonModel

HorizonModel::HorizonModel(std::shared_ptr<const CostModel> base)
    : base_(std::move(base)) {
  // The built-in horizon markets are maxima of linear functions: convex,
  // sub-additive cones.
  flags_.convex = true;
  flags_.sub_additive = true;
  flags_.delta = DeltaLaw::identity();
  flags_.h_bounds_increments = true;
  flags_.horizon_dominates = true;
}

// ---------------------------------------------------------------------------
// probe_properties

const AxiomResult* PropertyReport::find(const std::string& name) const {
  for (const auto& a : axioms)
    if (a.name == name) return &a;
  return nullptr;
}

bool PropertyReport::all_passed() const {
  for (const auto& a : axioms)
    if (a.checked && !a.passed) return false;
  return true;
}

namespace {
struct AxiomProbe {
  AxiomResult result;
  double abs_tol, rel_tol;

  AxiomProbe(std::string name, double at, double rt)
      : abs_tol(at), rel_tol(rt) {
    result.name = std::move(name);
    result.checked = true;
    result.passed = true;
  }

  // `violation` positive means the axiom failed by that margin before
  // tolerance scaling; `scale` is the magnitude of the quantities involved.
  void observe(double violation, double scale, const std::string& where) {
    const double allowed = abs_tol + rel_tol * std::fmax(1.0, scale);
    if (violation > allowed) {
      if (result.passed || violation > result.worst_violation) {
        result.worst_violation = violation;
        result.note = where;
      }
      result.passed = false;
    }
  }
};

std::string tag(const char* what, std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << what << " state#" << i << " position#" << j;
  return os.str();
}
}  // namespace

PropertyReport probe_properties(const CostModel& model, int t,
                                const std::vector<MarketState>& sample_states,
                                const std::vector<Position>& sample_positions,
                                double abs_tol, double rel_tol) {
  if (sample_states.empty() || sample_positions.empty())
    throw ConfigError("probe_properties needs nonempty samples");
  for (const auto& s : sample_states) model.validate_state(s);

  const auto& flags = model.flags();
  AxiomProbe zero("zero_at_zero", abs_tol, rel_tol);
  AxiomProbe cash("cash_invariance", abs_tol, rel_tol);
  AxiomProbe dominated("dominated_by_bound", abs_tol, rel_tol);
  AxiomProbe sub("sub_additive", abs_tol, rel_tol);
  AxiomProbe super("super_additive", abs_tol, rel_tol);
  AxiomProbe homog("super_delta_homogeneous", abs_tol, rel_tol);
  AxiomProbe monotone("monotone_increasing", abs_tol, rel_tol);
  sub.result.checked = flags.sub_additive;
  super.result.checked = flags.super_additive;

  const DeltaLaw delta =
      flags.delta.has_value() ? *flags.delta : DeltaLaw::identity();
  const double lambdas[] = {1.0, 1.5, 2.0, 5.0, 10.0};
  const double shifts[] = {3.5, -1.25, 1000.0};

  const Position origin = Position::zero(model.risky_assets());
  for (std::size_t i = 0; i < sample_states.size(); ++i) {
    const auto& s = sample_states[i];
    zero.observe(std::fabs(model.cost(t, s, origin)), 1.0, tag("zero", i, 0));

    for (std::size_t j = 0; j < sample_positions.size(); ++j) {
      const auto& z = sample_positions[j];
      const double cz = model.cost(t, s, z);

      for (double lam : shifts) {
        Position shifted = z;
        shifted.cash += lam;
        const double err = std::fabs(model.cost(t, s, shifted) - cz - lam);
        cash.observe(err, std::fabs(cz) + std::fabs(lam), tag("cash", i, j));
      }

      dominated.observe(std::fabs(cz) - model.cost_bound(t, s, z),
                        std::fabs(cz), tag("bound", i, j));

      if (sub.result.checked || super.result.checked) {
        const auto& w = sample_positions[(j + 1) % sample_positions.size()];
        const double cw = model.cost(t, s, w);
        const double czw = model.cost(t, s, z + w);
        const double scale =
            std::fabs(cz) + std::fabs(cw) + std::fabs(czw);
        if (sub.result.checked)
          sub.observe(czw - cz - cw, scale, tag("sub", i, j));
        if (super.result.checked)
          super.observe(cz + cw - czw, scale, tag("super", i, j));
      }

      for (double lam : lambdas) {
        Position scaled = z;
        scaled.cash *= lam;
        for (auto& x : scaled.risky) x *= lam;
        const double lhs = model.cost(t, s, scaled);
        const double rhs = delta(lam) * cz;
        homog.observe(rhs - lhs, std::fabs(lhs) + std::fabs(rhs),
                      tag("homog", i, j));
      }

      {
        const auto& w = sample_positions[(j + 1) % sample_positions.size()];
        Position above = z;
        above.cash += std::fabs(w.cash);
        for (std::size_t r = 0; r < above.risky.size(); ++r)
          above.risky[r] += std::fabs(w.risky[r]);
        const double c_above = model.cost(t, s, above);
        monotone.observe(cz - c_above, std::fabs(cz) + std::fabs(c_above),
                         tag("monotone", i, j));
      }
    }
  }

  PropertyReport report;
  report.axioms = {zero.result,     cash.result,  dominated.result,
                   sub.result,      super.result, homog.result,
                   monotone.result};
  return report;
}

}  // namespace superhedge
