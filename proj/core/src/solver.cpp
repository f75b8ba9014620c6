#include "superhedge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace superhedge {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn over [0, n) split into contiguous chunks, one per worker. Results
// must be written to disjoint cells so the outcome is schedule-independent.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t, int)>& fn) {
  threads = std::min<std::size_t>(resolve_threads(threads), n);
  if (threads <= 1 || n < 1024) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const std::size_t b = std::min(n, static_cast<std::size_t>(w) * chunk);
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
  }
  for (auto& th : pool) th.join();
}

struct ChunkStats {
  std::size_t candidates = 0;
  std::size_t cells = 0;
  std::size_t boundary_argmin = 0;
  double radius_min = kInf;
  double radius_max = -kInf;
};

}  // namespace

double d_zero_value(const SolveResult& zero, const CostModel& model,
                    const PositionGrid& grid, int t, std::uint32_t node,
                    std::span<const double> z_risky, bool* clamped) {
  const auto& theta = zero.layers[t].theta;
  const MarketState& s = zero.lattice->state(t, node);
  const double c = model.cost_risky(t, s, z_risky);
  const double th = grid.interpolate(theta[node], z_risky, clamped);
  return c + th;
}

Solver::Solver(Instance instance, SolverOptions options)
    : instance_(std::move(instance)), options_(options) {
  if (!instance_.market) throw ConfigError("instance has no cost model");
  if (instance_.grid.dims() != instance_.market->risky_assets())
    throw ConfigError("grid dimension must match the number of risky assets");
  const CostModel* market = instance_.market.get();
  auto lattice = build_lattice(
      instance_.support, instance_.initial_state, instance_.horizon,
      instance_.node_cap,
      [market](const MarketState& s) { market->validate_state(s); });
  lattice_ = std::make_shared<const SupportLattice>(std::move(lattice));
  horizon_model_ = std::make_shared<HorizonModel>(instance_.market);
}

bool Solver::uses_horizon_radius() const {
  const auto& f = instance_.market->flags();
  const bool stepb = f.sub_additive || f.super_additive || f.h_bounds_increments;
  return !f.delta.has_value() && f.horizon_dominates && stepb;
}

namespace {
bool own_radius_path(const CostModel& model) {
  const auto& f = model.flags();
  const bool stepb = f.sub_additive || f.super_additive || f.h_bounds_increments;
  return f.delta.has_value() && stepb;
}
}  // namespace

std::shared_ptr<const SolveResult> Solver::horizon_zero_solve() {
  if (!horizon_zero_)
    horizon_zero_ = std::make_shared<const SolveResult>(
        run(*horizon_model_, Payoff::zero(), nullptr, nullptr, true));
  return horizon_zero_;
}

std::shared_ptr<const SolveResult> Solver::zero_solve() {
  if (zero_) return zero_;
  SolveResult r;
  if (own_radius_path(*instance_.market)) {
    r = run(*instance_.market, Payoff::zero(), nullptr, nullptr, true);
  } else if (uses_horizon_radius()) {
    auto hz = horizon_zero_solve();
    r = run(*instance_.market, Payoff::zero(), hz.get(), horizon_model_.get(),
            false);
    r.horizon_zero = hz;
  } else {
    r = run(*instance_.market, Payoff::zero(), nullptr, nullptr, false);
  }
  zero_ = std::make_shared<const SolveResult>(std::move(r));
  return zero_;
}

SolveResult Solver::solve() {
  SolveResult res;
  if (instance_.payoff.is_zero()) {
    res = *zero_solve();
  } else {
    auto z = zero_solve();
    if (own_radius_path(*instance_.market)) {
      res = run(*instance_.market, instance_.payoff, z.get(),
                instance_.market.get(), false, z.get());
    } else if (uses_horizon_radius()) {
      auto hz = horizon_zero_solve();
      res = run(*instance_.market, instance_.payoff, hz.get(),
                horizon_model_.get(), false, z.get());
      res.horizon_zero = hz;
    } else {
      res = run(*instance_.market, instance_.payoff, nullptr, nullptr, false,
                z.get());
    }
    res.zero_solve = z;
  }
  if (!std::isfinite(res.price))
    throw NotHedgeable(
        "no feasible hedge on the grid: gamma_0(root, 0) is infinite");
  return res;
}

SolveResult Solver::run(const CostModel& model, const Payoff& payoff,
                        const SolveResult* sphere_zero,
                        const CostModel* sphere_model, bool sphere_from_self,
                        const SolveResult* null_zero) {
  const PositionGrid& grid = instance_.grid;
  const SupportLattice& lat = *lattice_;
  const int T = lat.horizon();
  const int dims = grid.dims();
  const std::size_t V = grid.size();
  const std::size_t zero_cell = grid.zero_flat();
  const int threads = options_.threads;

  SolveResult res;
  res.lattice = lattice_;
  res.layers.resize(T + 1);
  res.policy.argmin.assign(T, {});
  res.diagnostics.layers.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    res.layers[t].t = t;
    res.layers[t].convex_flag = model.flags().convex;
    res.diagnostics.layers[t].t = t;
  }

  // Grid coordinates and norms, shared by every layer.
  std::vector<double> coords(V * static_cast<std::size_t>(dims));
  std::vector<double> norms(V);
  for (std::size_t c = 0; c < V; ++c) {
    std::span<double> pt(coords.data() + c * dims, static_cast<std::size_t>(dims));
    grid.point_at(c, pt);
    double s2 = 0.0;
    for (int j = 0; j < dims; ++j) s2 += pt[j] * pt[j];
    norms[c] = std::sqrt(s2);
  }

  // Terminal layer: gamma_T(s, v) = g^1(s) + C_T(s, (0, g^2(s) - v)).
  {
    auto& layer = res.layers[T];
    const auto& nodes = lat.layers[T];
    layer.gamma.assign(nodes.size(), std::vector<double>(V));
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const MarketState& s = nodes[n].state;
      const Position g = payoff.value(model, s, static_cast<std::uint32_t>(n));
      auto& row = layer.gamma[n];
      parallel_for(V, threads, [&](std::size_t b, std::size_t e, int) {
        std::vector<double> z(dims);
        for (std::size_t c = b; c < e; ++c) {
          for (int j = 0; j < dims; ++j)
            z[j] = g.risky[j] - coords[c * dims + j];
          row[c] = g.cash + model.cost_risky(T, s, z);
        }
      });
    }
    auto& stats = res.diagnostics.layers[T];
    for (const auto& row : layer.gamma)
      for (double x : row) {
        stats.gamma_min = std::fmin(stats.gamma_min, x);
        stats.gamma_max = std::fmax(stats.gamma_max, x);
      }
  }

  // Radius machinery.
  const auto& mf = model.flags();
  const bool stepb_ok =
      mf.sub_additive || mf.super_additive || mf.h_bounds_increments;
  bool trim = options_.restrict_by_radius && dims == 1 && stepb_ok;
  const DeltaLaw* delta = nullptr;
  if (trim) {
    if (sphere_from_self && mf.delta)
      delta = &*mf.delta;
    else if (!sphere_from_self && sphere_model && sphere_model->flags().delta)
      delta = &*sphere_model->flags().delta;
    else
      trim = false;
  }
  const bool sphere_in_range =
      dims == 1 && grid.axis(0).min() <= -1.0 && grid.axis(0).max() >= 1.0;

  // Default fallback radius: generous multiple of the claim size plus the
  // grid extent.
  auto auto_fallback = [&]() {
    double max_g = 0.0;
    for (std::size_t n = 0; n < lat.layer_size(T); ++n) {
      const Position g = payoff.value(model, lat.state(T, static_cast<std::uint32_t>(n)),
                                      static_cast<std::uint32_t>(n));
      double s2 = 0.0;
      for (double x : g.risky) s2 += x * x;
      max_g = std::fmax(max_g, std::sqrt(s2));
    }
    double grid_extent = 0.0;
    for (int j = 0; j < dims; ++j) {
      const double m = std::fmax(std::fabs(grid.axis(j).min()),
                                 std::fabs(grid.axis(j).max()));
      grid_extent += m * m;
    }
    return 10.0 * max_g + std::sqrt(grid_extent);
  };

  for (int t = T - 1; t >= 0; --t) {
    const auto& nodes = lat.layers[t];
    auto& layer = res.layers[t];
    const auto& next_gamma = res.layers[t + 1].gamma;

    // Conditional-sup step: theta_t(s, v) = max over successors of
    // gamma_{t+1}(s', v). Exact finite max over the lattice adjacency.
    layer.theta.assign(nodes.size(), std::vector<double>(V));
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto& succ = nodes[n].succ;
      if (succ.empty()) throw EmptySupport("lattice node without successors");
      auto& row = layer.theta[n];
      parallel_for(V, threads, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t c = b; c < e; ++c) {
          double m = next_gamma[succ[0]][c];
          for (std::size_t k = 1; k < succ.size(); ++k)
            m = std::fmax(m, next_gamma[succ[k]][c]);
          row[c] = m;
        }
      });
    }

    // Sphere infimum i_t backing the candidate ball.
    auto& stats = res.diagnostics.layers[t];
    double i_t = std::numeric_limits<double>::quiet_NaN();
    bool fallback_engaged = false;
    double fallback_value = 0.0;
    if (trim && sphere_in_range) {
      const auto& theta_src =
          sphere_from_self ? layer.theta : sphere_zero->layers[t].theta;
      const CostModel& sm = sphere_from_self ? model : *sphere_model;
      double worst = kInf;
      for (std::size_t n = 0; n < nodes.size(); ++n) {
        for (double dir : {1.0, -1.0}) {
          const double z[1] = {dir};
          const double val = sm.cost_risky(t, nodes[n].state, z) +
                             grid.interpolate(theta_src[n], z);
          worst = std::fmin(worst, val);
        }
      }
      i_t = worst;
      stats.used_horizon_sphere = !sphere_from_self && sphere_model != nullptr &&
                                  sphere_model != instance_.market.get();
      if (i_t <= options_.radius_epsilon) {
        if (options_.fallback_radius.has_value())
          fallback_value = *options_.fallback_radius;
        else if (options_.fallback_auto)
          fallback_value = auto_fallback();
        else
          throw RadiusDegenerate(
              "sphere infimum i_t is not positive at t=" + std::to_string(t) +
              " and no fallback radius is configured");
        fallback_engaged = true;
      }
    }
    stats.sphere_inf = i_t;
    stats.fallback_engaged = fallback_engaged;
    const bool ball_active = trim && sphere_in_range && std::isfinite(i_t) &&
                             !fallback_engaged;

    // Null-space reduction: drop a grid axis from the candidate set when the
    // zero claim certifies that every position along it trades for free in
    // both directions. Axis-aligned null directions keep the reduction exact
    // on the grid.
    std::vector<std::uint8_t> keep_candidate;
    if (options_.use_null_space_reduction && model.flags().sub_additive &&
        (payoff.is_zero() || null_zero != nullptr)) {
      const auto& null_theta =
          payoff.is_zero() ? layer.theta : null_zero->layers[t].theta;
      std::vector<std::size_t> strides(dims, 1);
      for (int j = dims - 2; j >= 0; --j)
        strides[j] = strides[j + 1] *
                     static_cast<std::size_t>(grid.axis(j + 1).count);
      std::vector<std::uint8_t> axis_free(dims, 0);
      std::vector<double> probe(dims, 0.0);
      for (int a = 0; a < dims; ++a) {
        bool free_axis = grid.axis(a).count > 1;
        for (std::size_t n = 0; n < nodes.size() && free_axis; ++n) {
          for (int k = 0; k < grid.axis(a).count && free_axis; ++k) {
            if (k == grid.axis(a).zero_index) continue;
            std::fill(probe.begin(), probe.end(), 0.0);
            probe[a] = grid.axis(a).coord(k);
            const std::ptrdiff_t offset =
                (static_cast<std::ptrdiff_t>(k) - grid.axis(a).zero_index) *
                static_cast<std::ptrdiff_t>(strides[a]);
            const std::size_t flat = static_cast<std::size_t>(
                static_cast<std::ptrdiff_t>(zero_cell) + offset);
            const double d0 =
                model.cost_risky(t, nodes[n].state, probe) + null_theta[n][flat];
            if (std::fabs(d0) > 1e-9 * (1.0 + std::fabs(probe[a])))
              free_axis = false;
          }
        }
        axis_free[a] = free_axis ? 1 : 0;
        if (free_axis) ++stats.null_axes_dropped;
      }
      if (stats.null_axes_dropped > 0) {
        keep_candidate.assign(V, 1);
        for (std::size_t y = 0; y < V; ++y) {
          for (int a = 0; a < dims; ++a) {
            if (!axis_free[a]) continue;
            const std::size_t idx = (y / strides[a]) %
                                    static_cast<std::size_t>(grid.axis(a).count);
            if (idx != static_cast<std::size_t>(grid.axis(a).zero_index)) {
              keep_candidate[y] = 0;
              break;
            }
          }
        }
      }
    }

    // Pointwise-inf step.
    layer.gamma.assign(nodes.size(), std::vector<double>(V));
    res.policy.argmin[t].assign(
        nodes.size(), std::vector<std::uint32_t>(V, HedgePolicy::kNoAction));
    const int nchunks = std::max(1, resolve_threads(threads));
    std::vector<ChunkStats> chunk_stats;

    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const MarketState& s = nodes[n].state;
      const double* theta_row = layer.theta[n].data();
      auto& gamma_row = layer.gamma[n];
      auto& policy_row = res.policy.argmin[t][n];
      chunk_stats.assign(nchunks, ChunkStats{});
      parallel_for(V, threads, [&](std::size_t b, std::size_t e, int w) {
        std::vector<double> z(dims);
        std::vector<double> cost_row(dims == 1 ? V : 0);
        ChunkStats& cs = chunk_stats[w];
        for (std::size_t c = b; c < e; ++c) {
          const double* v = coords.data() + c * dims;
          double limit = kInf;
          if (ball_active) {
            for (int j = 0; j < dims; ++j) z[j] = -v[j];
            const double d0 = model.cost_risky(t, s, z) + theta_row[zero_cell];
            if (std::isfinite(d0)) {
              const double lambda =
                  std::fabs(d0) +
                  model.cost_bound_risky(t, s, std::span<const double>(v, dims));
              const double r = delta->inverse(lambda / i_t) + 1.0;
              limit = r + 1.0;
              cs.radius_min = std::fmin(cs.radius_min, r);
              cs.radius_max = std::fmax(cs.radius_max, r);
            }
          } else if (fallback_engaged) {
            limit = fallback_value;
            cs.radius_min = std::fmin(cs.radius_min, limit);
            cs.radius_max = std::fmax(cs.radius_max, limit);
          }

          if (dims == 1)
            model.cost_risky_row(t, s, coords.data(), V, v[0], cost_row.data());

          double best = kInf;
          std::uint32_t best_y = HedgePolicy::kNoAction;
          for (std::size_t y = 0; y < V; ++y) {
            if (norms[y] > limit) continue;
            if (!keep_candidate.empty() && !keep_candidate[y]) continue;
            ++cs.candidates;
            double val;
            if (dims == 1) {
              val = cost_row[y] + theta_row[y];
            } else {
              for (int j = 0; j < dims; ++j)
                z[j] = coords[y * dims + j] - v[j];
              val = model.cost_risky(t, s, z) + theta_row[y];
            }
            if (val < best) {
              best = val;
              best_y = static_cast<std::uint32_t>(y);
            } else if (val == best && std::isfinite(val) &&
                       best_y != HedgePolicy::kNoAction) {
              // Tie-break: smallest |y|, then lexicographically smallest.
              if (norms[y] < norms[best_y]) {
                best_y = static_cast<std::uint32_t>(y);
              } else if (norms[y] == norms[best_y]) {
                const double* a = coords.data() + y * dims;
                const double* bpt = coords.data() + best_y * dims;
                if (std::lexicographical_compare(a, a + dims, bpt, bpt + dims))
                  best_y = static_cast<std::uint32_t>(y);
              }
            }
          }
          gamma_row[c] = best;
          policy_row[c] = best_y;
          ++cs.cells;
          if (best_y != HedgePolicy::kNoAction && grid.is_boundary(best_y))
            ++cs.boundary_argmin;
        }
      });
      for (const auto& cs : chunk_stats) {
        stats.avg_candidates += static_cast<double>(cs.candidates);
        stats.boundary_argmin += cs.boundary_argmin;
        stats.radius_min = std::fmin(stats.radius_min, cs.radius_min);
        stats.radius_max = std::fmax(stats.radius_max, cs.radius_max);
      }
    }
    const double total_cells = static_cast<double>(nodes.size()) * V;
    stats.avg_candidates /= total_cells;
    for (const auto& row : layer.gamma)
      for (double x : row) {
        stats.gamma_min = std::fmin(stats.gamma_min, x);
        stats.gamma_max = std::fmax(stats.gamma_max, x);
      }
  }

  res.price = res.layers[0].gamma[0][zero_cell];
  return res;
}

RolloutReport rollout(const SolveResult& result, const Instance& instance,
                      double initial_cash, std::size_t path_cap) {
  const SupportLattice& lat = *result.lattice;
  const PositionGrid& grid = instance.grid;
  const CostModel& model = *instance.market;
  const int T = lat.horizon();
  const int dims = grid.dims();

  // Path count check before enumerating.
  {
    std::vector<double> paths_from(lat.layer_size(T), 1.0);
    for (int t = T - 1; t >= 0; --t) {
      std::vector<double> cur(lat.layer_size(t), 0.0);
      for (std::size_t n = 0; n < lat.layer_size(t); ++n)
        for (auto m : lat.layers[t][n].succ) cur[n] += paths_from[m];
      paths_from = std::move(cur);
    }
    if (paths_from[0] > static_cast<double>(path_cap))
      throw TooLarge("rollout would enumerate more paths than the cap");
  }

  RolloutReport report;
  std::vector<double> y(dims), v(dims), z(dims);

  std::vector<std::uint32_t> node_path(T + 1);
  std::vector<std::size_t> cell_path(T);
  std::vector<double> cost_path(T);

  std::function<void(int, std::uint32_t, std::size_t, double)> walk =
      [&](int t, std::uint32_t node, std::size_t cell, double cash) {
        node_path[t] = node;
        if (t == T) {
          const MarketState& s = lat.state(T, node);
          const Position g = instance.payoff.value(model, s, node);
          grid.point_at(cell, v);
          Position vt{cash, std::vector<double>(v.begin(), v.end())};
          const double shortfall = model.liquidation(T, s, vt - g);
          PathReport pr;
          pr.nodes = node_path;
          pr.position_cell = cell_path;
          pr.trade_costs = cost_path;
          pr.terminal_cash = cash;
          pr.shortfall = shortfall;
          report.worst_shortfall = std::fmin(report.worst_shortfall, shortfall);
          report.paths.push_back(std::move(pr));
          return;
        }
        const std::uint32_t action = result.policy.at(t, node, cell);
        if (action == HedgePolicy::kNoAction)
          throw NotHedgeable("policy has no action along a reachable path");
        const MarketState& s = lat.state(t, node);
        grid.point_at(cell, v);
        grid.point_at(action, y);
        for (int j = 0; j < dims; ++j) z[j] = y[j] - v[j];
        const double trade = model.cost_risky(t, s, z);
        cell_path[t] = action;
        cost_path[t] = trade;
        for (auto m : lat.layers[t][node].succ)
          walk(t + 1, m, action, cash - trade);
      };

  walk(0, 0, grid.zero_flat(), initial_cash);
  return report;
}

}  // namespace superhedge
