#pragma once

#include <optional>
#include <vector>

#include "superhedge/solver.hpp"

namespace superhedge {

/// Deterministic unit directions in the risky hyperplane {z^1 = 0}. Exact
/// {+1, -1} for one risky asset; for more, the +/- coordinate axes followed by
/// a prefix-nested low-discrepancy sequence, so doubling `count` only adds
/// directions.
std::vector<std::vector<double>> sphere_sample(int risky_dim, int count);

struct AipCheck {
  bool aip = false;
  double residual = 0.0;  // max |gamma_t^0(node, 0)| over nodes
  /// A minimizer on the grid edge with a negative value: the compact-grid
  /// signature of an instantaneous profit that the grid merely truncated.
  bool boundary_hit = false;
};

/// AIP at time t: the zero claim prices to zero at every node.
AipCheck check_aip(const SolveResult& zero, const PositionGrid& grid, int t,
                   double tol);

struct SaipCheck {
  bool saip = false;
  double sphere_inf = 0.0;  // i_t minimized over nodes and directions
};

/// SAIP at time t (t < horizon): AIP plus a strictly positive sphere infimum
/// of the one-step zero-claim cost D_t^0(s, 0, z). Pass the enlarged market's
/// zero solve and model to run the horizon variant.
SaipCheck check_saip(const SolveResult& zero, const CostModel& model,
                     const PositionGrid& grid, int t, double tol_aip,
                     double tol_saip, int sphere_count);

struct NullSpaceCheck {
  bool laip = false;
  /// Orthonormal basis of the estimated zero-cost direction space N_t.
  std::vector<std::vector<double>> basis;
};

/// Estimates the zero-cost direction space from sphere samples and applies the
/// symmetry test: a direction belongs to N_t only when the reverse trade is
/// also free. Throws NotApplicable unless the model is sub-additive.
NullSpaceCheck estimate_null_space(const SolveResult& zero,
                                   const CostModel& model,
                                   const PositionGrid& grid, int t, double tol,
                                   int sphere_count);

struct TimeDiagnostics {
  int t = 0;
  bool aip = false;
  double aip_residual = 0.0;
  bool boundary_hit = false;
  std::optional<bool> saip;
  std::optional<double> sphere_inf;
  bool laip_applicable = false;
  std::optional<bool> laip;
  std::size_t null_space_dim = 0;
  std::optional<bool> horizon_saip;
  std::optional<double> horizon_sphere_inf;
};

struct ArbitrageReport {
  double tol_aip = 1e-8;
  double tol_saip = 1e-8;
  int sphere_count = 128;
  std::vector<TimeDiagnostics> times;  // t = 0..T

  bool aip_all() const;
  bool saip_all() const;
};

/// Full diagnostic sweep over every time step; the horizon-market checks run
/// when the model's radius bound lives on the enlarged market (fixed costs).
ArbitrageReport check_arbitrage(Solver& solver, double tol_aip = 1e-8,
                                double tol_saip = 1e-8, int sphere_count = 128);

}  // namespace superhedge
