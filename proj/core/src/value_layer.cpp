#include "superhedge/value_layer.hpp"

#include <cmath>

#include "superhedge/common.hpp"

namespace superhedge {

namespace {
// Applies fn to every index triple (center, center-stride, center+stride)
// along one axis of the flattened grid.
template <typename Fn>
void for_each_axis_triple(const PositionGrid& grid, int axis, Fn&& fn) {
  const std::size_t total = grid.size();
  // Recover stride and count from the grid layout.
  std::size_t stride = 1;
  for (int j = grid.dims() - 1; j > axis; --j)
    stride *= static_cast<std::size_t>(grid.axis(j).count);
  const std::size_t count = static_cast<std::size_t>(grid.axis(axis).count);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const std::size_t idx = (flat / stride) % count;
    if (idx == 0 || idx + 1 == count) continue;
    fn(flat - stride, flat, flat + stride);
  }
}
}  // namespace

double ValueLayer::midpoint_convexity_violation(const PositionGrid& grid) const {
  double worst = 0.0;
  for (const auto& table : gamma) {
    for (int axis = 0; axis < grid.dims(); ++axis) {
      for_each_axis_triple(grid, axis, [&](std::size_t lo, std::size_t mid,
                                           std::size_t hi) {
        const double a = table[lo], b = table[mid], c = table[hi];
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return;
        worst = std::fmax(worst, 2.0 * b - a - c);
      });
    }
  }
  return worst;
}

double ValueLayer::monotone_nonincreasing_violation(
    const PositionGrid& grid) const {
  double worst = 0.0;
  for (const auto& table : gamma) {
    for (int axis = 0; axis < grid.dims(); ++axis) {
      for_each_axis_triple(grid, axis, [&](std::size_t lo, std::size_t mid,
                                           std::size_t hi) {
        const double a = table[lo], b = table[mid], c = table[hi];
        if (std::isfinite(a) && std::isfinite(b))
          worst = std::fmax(worst, b - a);
        if (std::isfinite(b) && std::isfinite(c))
          worst = std::fmax(worst, c - b);
      });
    }
  }
  return worst;
}

}  // namespace superhedge
