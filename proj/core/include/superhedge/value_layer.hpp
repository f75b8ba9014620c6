#pragma once

#include <cstdint>
#include <vector>

#include "superhedge/grid.hpp"

namespace superhedge {

/// Tabulated minimal-cost function for one time step: gamma[node][grid point],
/// plus the conditional-sup table theta for t < T. Cells may hold +inf when no
/// candidate action is feasible.
struct ValueLayer {
  int t = 0;
  bool convex_flag = false;
  std::vector<std::vector<double>> gamma;
  std::vector<std::vector<double>> theta;  // empty at the terminal time

  /// Worst midpoint-convexity violation of gamma along every grid axis
  /// (0 when the tables are convex; +inf cells are skipped).
  double midpoint_convexity_violation(const PositionGrid& grid) const;

  /// Worst violation of "gamma nonincreasing as the position grows
  /// coordinatewise" (meaningful at the terminal layer).
  double monotone_nonincreasing_violation(const PositionGrid& grid) const;
};

/// Minimizing post-trade position per (time, node, grid point), stored as a
/// flat grid index. kNoAction marks cells whose candidate set was empty.
struct HedgePolicy {
  static constexpr std::uint32_t kNoAction = 0xffffffffu;
  std::vector<std::vector<std::vector<std::uint32_t>>> argmin;  // [t][node][cell]

  std::uint32_t at(int t, std::uint32_t node, std::size_t cell) const {
    return argmin[t][node][cell];
  }
};

}  // namespace superhedge
