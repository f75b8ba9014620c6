#include "superhedge/arbitrage.hpp"

#include <algorithm>
#include <cmath>

namespace superhedge {

namespace {

double van_der_corput(std::size_t n, std::size_t base) {
  double q = 0.0, bk = 1.0 / static_cast<double>(base);
  while (n > 0) {
    q += static_cast<double>(n % base) * bk;
    n /= base;
    bk /= static_cast<double>(base);
  }
  return q;
}

constexpr double kGoldenFrac = 0.6180339887498949;  // 1/phi

std::vector<double> unit_axis(int dim, int axis, double sign) {
  std::vector<double> v(dim, 0.0);
  v[axis] = sign;
  return v;
}

}  // namespace

std::vector<std::vector<double>> sphere_sample(int risky_dim, int count) {
  if (risky_dim < 1) throw ConfigError("sphere sample needs a positive dimension");
  std::vector<std::vector<double>> dirs;
  if (risky_dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
    return dirs;
  }
  for (int a = 0; a < risky_dim; ++a) {
    dirs.push_back(unit_axis(risky_dim, a, 1.0));
    dirs.push_back(unit_axis(risky_dim, a, -1.0));
  }
  const std::size_t target =
      std::max<std::size_t>(static_cast<std::size_t>(count), dirs.size());
  std::size_t k = 1;
  static const std::size_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  while (dirs.size() < target) {
    std::vector<double> v(risky_dim);
    if (risky_dim == 2) {
      const double angle = 2.0 * M_PI * std::fmod(k * kGoldenFrac, 1.0);
      v[0] = std::cos(angle);
      v[1] = std::sin(angle);
    } else if (risky_dim == 3) {
      const double zc = 1.0 - 2.0 * van_der_corput(k, 2);
      const double r = std::sqrt(std::fmax(0.0, 1.0 - zc * zc));
      const double angle = 2.0 * M_PI * std::fmod(k * kGoldenFrac, 1.0);
      v[0] = r * std::cos(angle);
      v[1] = r * std::sin(angle);
      v[2] = zc;
    } else {
      double norm2 = 0.0;
      for (int j = 0; j < risky_dim; ++j) {
        v[j] = 2.0 * van_der_corput(k, primes[j % 10]) - 1.0;
        norm2 += v[j] * v[j];
      }
      if (norm2 < 1e-4) {
        ++k;
        continue;
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& x : v) x *= inv;
    }
    dirs.push_back(std::move(v));
    ++k;
  }
  return dirs;
}

AipCheck check_aip(const SolveResult& zero, const PositionGrid& grid, int t,
                   double tol) {
  AipCheck out;
  const std::size_t zero_cell = grid.zero_flat();
  const auto& layer = zero.layers[t];
  double residual = 0.0;
  for (std::size_t n = 0; n < layer.gamma.size(); ++n) {
    const double g = layer.gamma[n][zero_cell];
    residual = std::fmax(residual, std::fabs(g));
    if (g < -tol && t < zero.lattice->horizon()) {
      const std::uint32_t arg =
          zero.policy.at(t, static_cast<std::uint32_t>(n), zero_cell);
      if (arg != HedgePolicy::kNoAction && grid.is_boundary(arg))
        out.boundary_hit = true;
    }
  }
  out.residual = residual;
  out.aip = residual <= tol;
  return out;
}

SaipCheck check_saip(const SolveResult& zero, const CostModel& model,
                     const PositionGrid& grid, int t, double tol_aip,
                     double tol_saip, int sphere_count) {
  if (t >= zero.lattice->horizon())
    throw ConfigError("SAIP is a one-step condition: need t < horizon");
  const auto dirs = sphere_sample(grid.dims(), sphere_count);
  double inf = kInf;
  for (std::size_t n = 0; n < zero.lattice->layer_size(t); ++n)
    for (const auto& z : dirs)
      inf = std::fmin(inf, d_zero_value(zero, model, grid, t,
                                        static_cast<std::uint32_t>(n), z));
  SaipCheck out;
  out.sphere_inf = inf;
  out.saip = check_aip(zero, grid, t, tol_aip).aip && inf > tol_saip;
  return out;
}

NullSpaceCheck estimate_null_space(const SolveResult& zero,
                                   const CostModel& model,
                                   const PositionGrid& grid, int t, double tol,
                                   int sphere_count) {
  if (!model.flags().sub_additive)
    throw NotApplicable(
        "null-space estimation assumes a sub-additive cost model");
  if (t >= zero.lattice->horizon())
    throw ConfigError("LAIP is a one-step condition: need t < horizon");

  const auto dirs = sphere_sample(grid.dims(), sphere_count);
  const int dim = grid.dims();
  bool symmetric = true;
  std::vector<std::vector<double>> collected;
  for (std::size_t n = 0; n < zero.lattice->layer_size(t); ++n) {
    for (const auto& z : dirs) {
      std::vector<double> neg(z);
      for (auto& x : neg) x = -x;
      const auto id = static_cast<std::uint32_t>(n);
      const bool fwd = d_zero_value(zero, model, grid, t, id, z) <= tol;
      const bool bwd = d_zero_value(zero, model, grid, t, id, neg) <= tol;
      if (fwd != bwd) symmetric = false;
      if (fwd && bwd) collected.push_back(z);
    }
  }

  // Rank-revealing Gram-Schmidt over the collected directions.
  NullSpaceCheck out;
  const double rank_tol = 1e-8;
  for (const auto& raw : collected) {
    std::vector<double> v(raw);
    for (const auto& b : out.basis) {
      double dot = 0.0;
      for (int j = 0; j < dim; ++j) dot += v[j] * b[j];
      for (int j = 0; j < dim; ++j) v[j] -= dot * b[j];
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > rank_tol * rank_tol) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& x : v) x *= inv;
      out.basis.push_back(std::move(v));
    }
  }
  out.laip = check_aip(zero, grid, t, tol).aip && symmetric;
  return out;
}

bool ArbitrageReport::aip_all() const {
  for (const auto& d : times)
    if (!d.aip) return false;
  return true;
}

bool ArbitrageReport::saip_all() const {
  for (const auto& d : times)
    if (d.saip.has_value() && !*d.saip) return false;
  return true;
}

ArbitrageReport check_arbitrage(Solver& solver, double tol_aip,
                                double tol_saip, int sphere_count) {
  ArbitrageReport report;
  report.tol_aip = tol_aip;
  report.tol_saip = tol_saip;
  report.sphere_count = sphere_count;

  const auto zero = solver.zero_solve();
  const PositionGrid& grid = solver.instance().grid;
  const CostModel& model = *solver.instance().market;
  const int T = solver.lattice().horizon();
  const bool horizon_wanted = solver.uses_horizon_radius();
  std::shared_ptr<const SolveResult> hzero;
  if (horizon_wanted) hzero = solver.horizon_zero_solve();

  for (int t = 0; t <= T; ++t) {
    TimeDiagnostics d;
    d.t = t;
    const auto aip = check_aip(*zero, grid, t, tol_aip);
    d.aip = aip.aip;
    d.aip_residual = aip.residual;
    d.boundary_hit = aip.boundary_hit;
    if (t < T) {
      const auto saip =
          check_saip(*zero, model, grid, t, tol_aip, tol_saip, sphere_count);
      d.saip = saip.saip;
      d.sphere_inf = saip.sphere_inf;
      try {
        const auto ns =
            estimate_null_space(*zero, model, grid, t, tol_saip, sphere_count);
        d.laip_applicable = true;
        d.laip = ns.laip;
        d.null_space_dim = ns.basis.size();
      } catch (const NotApplicable&) {
        d.laip_applicable = false;
      }
      if (horizon_wanted) {
        const auto hs = check_saip(*hzero, *solver.horizon_model(), grid, t,
                                   tol_aip, tol_saip, sphere_count);
        d.horizon_saip = hs.saip;
        d.horizon_sphere_inf = hs.sphere_inf;
      }
    }
    report.times.push_back(d);
  }
  return report;
}

}  // namespace superhedge
