#include "superhedge/support_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace superhedge {

SupportModel SupportModel::multiplicative(
    std::vector<std::vector<double>> factors) {
  if (factors.empty()) throw ConfigError("need at least one factor vector");
  SupportModel m;
  m.kind_ = SupportKind::Multiplicative;
  m.vectors_ = std::move(factors);
  return m;
}

SupportModel SupportModel::additive(
    std::vector<std::vector<double>> increments) {
  if (increments.empty()) throw ConfigError("need at least one increment vector");
  SupportModel m;
  m.kind_ = SupportKind::Additive;
  m.vectors_ = std::move(increments);
  return m;
}

SupportModel SupportModel::table(std::vector<TableRow> rows) {
  if (rows.empty()) throw ConfigError("transition table is empty");
  SupportModel m;
  m.kind_ = SupportKind::Table;
  m.rows_ = std::move(rows);
  return m;
}

bool states_equal(const MarketState& a, const MarketState& b, double tol) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double scale = std::fmax(1.0, std::fmax(std::fabs(a[i]), std::fabs(b[i])));
    if (std::fabs(a[i] - b[i]) > tol * scale) return false;
  }
  return true;
}

namespace {
void check_vector_dim(const std::vector<double>& v, std::size_t m,
                      const char* what) {
  if (v.size() != m) {
    std::ostringstream os;
    os << what << " has " << v.size() << " coordinates, state has " << m;
    throw LayoutMismatch(os.str());
  }
}

// Order-preserving dedup: drop entries equal (within tol) to an earlier one.
void dedup_keep_first(std::vector<MarketState>& list, double tol) {
  std::vector<MarketState> out;
  for (auto& s : list) {
    bool seen = false;
    for (const auto& kept : out)
      if (states_equal(kept, s, tol)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(std::move(s));
  }
  list = std::move(out);
}
}  // namespace

std::vector<MarketState> SupportModel::successors(int t,
                                                  const MarketState& s) const {
  std::vector<MarketState> out;
  switch (kind_) {
    case SupportKind::Multiplicative:
      for (const auto& f : vectors_) {
        check_vector_dim(f, s.dim(), "factor vector");
        MarketState next = s;
        for (std::size_t i = 0; i < s.dim(); ++i) next.coords[i] = s[i] * f[i];
        out.push_back(std::move(next));
      }
      break;
    case SupportKind::Additive:
      for (const auto& inc : vectors_) {
        check_vector_dim(inc, s.dim(), "increment vector");
        MarketState next = s;
        for (std::size_t i = 0; i < s.dim(); ++i) next.coords[i] = s[i] + inc[i];
        out.push_back(std::move(next));
      }
      break;
    case SupportKind::Table:
      for (const auto& row : rows_) {
        if (row.t != t) continue;
        check_vector_dim(row.parent, s.dim(), "table parent");
        if (!states_equal(MarketState{row.parent}, s, recombine_tol)) continue;
        out.push_back(MarketState{row.child});
      }
      break;
  }
  dedup_keep_first(out, recombine_tol);
  if (out.empty()) {
    std::ostringstream os;
    os << "no successor configured at t=" << t;
    throw EmptySupport(os.str());
  }
  return out;
}

double SupportModel::radius_bound(int t, const MarketState& s) const {
  double worst = 0.0;
  for (const auto& next : successors(t, s)) {
    double norm = 0.0;
    for (double c : next.coords) norm += c * c;
    worst = std::fmax(worst, std::sqrt(norm));
  }
  return worst;
}

std::size_t SupportLattice::node_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

SupportLattice build_lattice(
    const SupportModel& model, const MarketState& s0, int horizon,
    std::size_t node_cap,
    const std::function<void(const MarketState&)>& validate) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  SupportLattice lattice;
  lattice.layers.resize(horizon + 1);
  if (validate) validate(s0);
  lattice.layers[0].push_back(LatticeNode{s0, {}});

  for (int t = 0; t < horizon; ++t) {
    auto& parents = lattice.layers[t];
    // Gather all successors, then recombine across parents.
    std::vector<MarketState> pool;
    std::vector<std::vector<MarketState>> per_parent(parents.size());
    for (std::size_t p = 0; p < parents.size(); ++p) {
      per_parent[p] = model.successors(t, parents[p].state);
      for (const auto& s : per_parent[p]) pool.push_back(s);
    }
    std::sort(pool.begin(), pool.end(),
              [](const MarketState& a, const MarketState& b) {
                return a.coords < b.coords;
              });
    std::vector<MarketState> reps;
    for (const auto& s : pool) {
      if (reps.empty() || !states_equal(reps.back(), s, model.recombine_tol))
        reps.push_back(s);
    }
    if (reps.size() > node_cap) {
      std::ostringstream os;
      os << "layer " << t + 1 << " would hold " << reps.size()
         << " nodes, above the cap of " << node_cap;
      throw Explosion(os.str());
    }
    auto& next_layer = lattice.layers[t + 1];
    next_layer.reserve(reps.size());
    for (auto& s : reps) {
      if (validate) validate(s);
      next_layer.push_back(LatticeNode{std::move(s), {}});
    }
    auto find_rep = [&](const MarketState& s) -> std::uint32_t {
      // Binary search by lexicographic order, then scan the tolerance window.
      auto it = std::lower_bound(
          next_layer.begin(), next_layer.end(), s,
          [](const LatticeNode& n, const MarketState& v) {
            return n.state.coords < v.coords;
          });
      const auto base = static_cast<std::ptrdiff_t>(it - next_layer.begin());
      for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(next_layer.size()); ++d) {
        for (std::ptrdiff_t k : {base + d, base - d - 1}) {
          if (k >= 0 && k < static_cast<std::ptrdiff_t>(next_layer.size()) &&
              states_equal(next_layer[k].state, s, model.recombine_tol))
            return static_cast<std::uint32_t>(k);
        }
      }
      throw Error("internal: recombined successor not found");
    };
    for (std::size_t p = 0; p < parents.size(); ++p) {
      for (const auto& s : per_parent[p])
        parents[p].succ.push_back(find_rep(s));
      std::sort(parents[p].succ.begin(), parents[p].succ.end());
      parents[p].succ.erase(
          std::unique(parents[p].succ.begin(), parents[p].succ.end()),
          parents[p].succ.end());
    }
  }
  return lattice;
}

}  // namespace superhedge
