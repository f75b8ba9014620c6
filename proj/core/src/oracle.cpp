#include "superhedge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace superhedge {

namespace {

struct TreeNode {
  int t;
  std::uint32_t lat_node;
  int parent;  // index into the tree, -1 at the root
};

}  // namespace

double enumerate_price(const Instance& instance, std::size_t strategy_cap,
                       int threads) {
  const CostModel& model = *instance.market;
  const PositionGrid& grid = instance.grid;
  auto lattice = build_lattice(
      instance.support, instance.initial_state, instance.horizon,
      instance.node_cap,
      [&model](const MarketState& s) { model.validate_state(s); });
  const int T = lattice.horizon();
  const int dims = grid.dims();
  const std::size_t G = grid.size();

  // Unroll the lattice into a tree: one decision per path prefix, which is
  // what adaptedness means on the scenario model.
  std::vector<TreeNode> tree;
  tree.push_back({0, 0, -1});
  std::vector<int> decision_slot;  // tree index -> strategy slot, -1 for leaves
  std::vector<std::vector<int>> leaf_chain;  // per leaf: tree indices root..leaf
  std::size_t total_strategies = 0;
  {
    std::size_t begin = 0;
    for (int t = 0; t < T; ++t) {
      const std::size_t end = tree.size();
      for (std::size_t k = begin; k < end; ++k) {
        for (auto succ : lattice.layers[t][tree[k].lat_node].succ)
          tree.push_back({t + 1, succ, static_cast<int>(k)});
      }
      begin = end;
    }
    decision_slot.assign(tree.size(), -1);
    int slots = 0;
    for (std::size_t k = 0; k < tree.size(); ++k)
      if (tree[k].t < T) decision_slot[k] = slots++;
    double strategies = 1.0;
    for (int i = 0; i < slots; ++i) {
      strategies *= static_cast<double>(G);
      if (strategies > static_cast<double>(strategy_cap))
        throw TooLarge("strategy space exceeds the enumeration cap");
    }
    total_strategies = static_cast<std::size_t>(strategies);
    for (std::size_t k = 0; k < tree.size(); ++k) {
      if (tree[k].t != T) continue;
      std::vector<int> chain;
      for (int cur = static_cast<int>(k); cur != -1; cur = tree[cur].parent)
        chain.push_back(cur);
      std::reverse(chain.begin(), chain.end());
      leaf_chain.push_back(std::move(chain));
    }
  }

  // Grid coordinates, identical to the solver's.
  std::vector<double> coords(G * static_cast<std::size_t>(dims));
  for (std::size_t c = 0; c < G; ++c)
    grid.point_at(c, std::span<double>(coords.data() + c * dims, dims));
  const std::size_t zero_cell = grid.zero_flat();

  // Rebalance costs per decision node: cost[prev_cell * G + cell], evaluated
  // exactly as the solver evaluates them.
  const int n_slots = static_cast<int>(std::count_if(
      decision_slot.begin(), decision_slot.end(), [](int s) { return s >= 0; }));
  std::vector<std::vector<double>> trade_cost(n_slots);
  std::vector<double> z(dims);
  for (std::size_t k = 0; k < tree.size(); ++k) {
    const int slot = decision_slot[k];
    if (slot < 0) continue;
    const MarketState& s = lattice.state(tree[k].t, tree[k].lat_node);
    auto& table = trade_cost[slot];
    table.resize(G * G);
    for (std::size_t prev = 0; prev < G; ++prev)
      for (std::size_t cell = 0; cell < G; ++cell) {
        for (int j = 0; j < dims; ++j)
          z[j] = coords[cell * dims + j] - coords[prev * dims + j];
        table[prev * G + cell] = model.cost_risky(tree[k].t, s, z);
      }
  }

  // Terminal addend per leaf and previous cell:
  // g^1(s) + C_T(s, g^2(s) - y_prev).
  std::vector<std::vector<double>> terminal(leaf_chain.size());
  for (std::size_t l = 0; l < leaf_chain.size(); ++l) {
    const int leaf = leaf_chain[l].back();
    const MarketState& s = lattice.state(T, tree[leaf].lat_node);
    const Position g = instance.payoff.value(model, s, tree[leaf].lat_node);
    terminal[l].resize(G);
    for (std::size_t prev = 0; prev < G; ++prev) {
      for (int j = 0; j < dims; ++j)
        z[j] = g.risky[j] - coords[prev * dims + j];
      terminal[l][prev] = g.cash + model.cost_risky(T, s, z);
    }
  }

  // Odometer over all strategy assignments, scanned in contiguous chunks.
  auto scan_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> sigma(n_slots, 0);
    std::size_t rem = begin;
    for (int d = 0; d < n_slots; ++d) {
      sigma[d] = rem % G;
      rem /= G;
    }
    double best = kInf;
    for (std::size_t it = begin; it < end; ++it) {
      double worst = -kInf;
      for (std::size_t l = 0; l < leaf_chain.size(); ++l) {
        const auto& chain = leaf_chain[l];
        // Right-fold from the leaf so the addition order matches the
        // backward recursion.
        double val = terminal[l][sigma[decision_slot[chain[T - 1]]]];
        for (int t = T - 1; t >= 1; --t) {
          const int slot = decision_slot[chain[t]];
          const int prev_slot = decision_slot[chain[t - 1]];
          val = trade_cost[slot][sigma[prev_slot] * G + sigma[slot]] + val;
        }
        val = trade_cost[decision_slot[chain[0]]]
                        [zero_cell * G + sigma[decision_slot[chain[0]]]] +
              val;
        worst = std::fmax(worst, val);
      }
      best = std::fmin(best, worst);

      int digit = 0;
      while (digit < n_slots && ++sigma[digit] == G) {
        sigma[digit] = 0;
        ++digit;
      }
    }
    return best;
  };

  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  const std::size_t min_chunk = 4096;
  const auto workers = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(threads),
      std::max<std::size_t>(1, total_strategies / min_chunk)));
  if (workers <= 1) return scan_range(0, total_strategies);

  std::vector<double> partial(workers, kInf);
  std::vector<std::thread> pool;
  const std::size_t chunk = (total_strategies + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t b = std::min(total_strategies, w * chunk);
    const std::size_t e = std::min(total_strategies, b + chunk);
    pool.emplace_back([&, b, e, w] { partial[w] = scan_range(b, e); });
  }
  for (auto& th : pool) th.join();
  double best = kInf;
  for (double p : partial) best = std::fmin(best, p);
  return best;
}

double binomial_frictionless_price(double s0, double up, double down,
                                   double strike, int steps) {
  if (!(down < 1.0 && 1.0 < up))
    throw ArbitrageParams(
        "spot must lie strictly between its one-step successors "
        "(need down < 1 < up)");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  const double q = (1.0 - down) / (up - down);
  std::vector<double> values(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double terminal =
        s0 * std::pow(up, k) * std::pow(down, steps - k);
    values[k] = std::fmax(terminal - strike, 0.0);
  }
  for (int t = steps - 1; t >= 0; --t)
    for (int k = 0; k <= t; ++k)
      values[k] = q * values[k + 1] + (1.0 - q) * values[k];
  return values[0];
}

double verify_superhedge(const SolveResult& result, const Instance& instance,
                         double slack) {
  return rollout(result, instance, result.price + slack).worst_shortfall;
}

double lipschitz_slack(const Instance& instance,
                       const SupportLattice& lattice) {
  const CostModel& model = *instance.market;
  const int assets = model.risky_assets();
  double lipschitz = 0.0;
  std::vector<double> unit(assets, 0.0);
  for (int t = 0; t <= lattice.horizon(); ++t) {
    for (const auto& node : lattice.layers[t]) {
      double total = 0.0;
      for (int i = 0; i < assets; ++i) {
        unit[i] = 1.0;
        total += model.cost_bound_risky(t, node.state, unit);
        unit[i] = 0.0;
      }
      lipschitz = std::fmax(lipschitz, total);
    }
  }
  double step = 0.0;
  for (int j = 0; j < instance.grid.dims(); ++j)
    step = std::fmax(step, instance.grid.axis(j).step);
  return lipschitz * step;
}

}  // namespace superhedge
