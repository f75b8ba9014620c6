#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "superhedge/common.hpp"
#include "superhedge/market_state.hpp"

namespace superhedge {

enum class SupportKind { Multiplicative, Additive, Table };

/// One explicit transition of a Table support model.
struct TableRow {
  int t = 0;
  std::vector<double> parent;
  std::vector<double> child;
};

/// Finite representation of the conditional support of the next market state:
/// a list of successor functions applied to the current state or an explicit
/// transition table.
class SupportModel {
 public:
  static SupportModel multiplicative(std::vector<std::vector<double>> factors);
  static SupportModel additive(std::vector<std::vector<double>> increments);
  static SupportModel table(std::vector<TableRow> rows);

  SupportKind kind() const { return kind_; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }

  /// Finite, nonempty, deduplicated successor list in deterministic order.
  std::vector<MarketState> successors(int t, const MarketState& s) const;

  /// Continuous bound R_t(s) on the successor norm: |s'| <= R_t(s).
  double radius_bound(int t, const MarketState& s) const;

  double recombine_tol = 1e-9;

 private:
  SupportKind kind_ = SupportKind::Multiplicative;
  std::vector<std::vector<double>> vectors_;  // factors or increments
  std::vector<TableRow> rows_;
};

/// True when two states coincide within the relative recombination tolerance.
bool states_equal(const MarketState& a, const MarketState& b, double tol);

struct LatticeNode {
  MarketState state;
  std::vector<std::uint32_t> succ;  // indices into the next layer
};

/// Scenario lattice: per-time node lists with successor adjacency. Layer 0
/// holds the single initial state.
struct SupportLattice {
  std::vector<std::vector<LatticeNode>> layers;

  int horizon() const { return static_cast<int>(layers.size()) - 1; }
  const MarketState& state(int t, std::uint32_t id) const {
    return layers[t][id].state;
  }
  std::size_t layer_size(int t) const { return layers[t].size(); }
  std::size_t node_count() const;
};

/// Materializes the lattice by repeated successor expansion with recombination
/// (states equal within tolerance merge; the lexicographically smallest
/// representative is kept). `validate` runs on every distinct state.
SupportLattice build_lattice(
    const SupportModel& model, const MarketState& s0, int horizon,
    std::size_t node_cap = 1'000'000,
    const std::function<void(const MarketState&)>& validate = {});

}  // namespace superhedge
