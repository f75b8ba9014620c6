#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "superhedge/common.hpp"

namespace superhedge {

/// One uniform axis of the position grid. Coordinates are generated as
/// (index - zero_index) * step so the origin is on the grid bit-exactly and
/// halving the step reproduces the coarse points bit-exactly.
struct GridAxis {
  double step = 0.0;
  int count = 0;
  int zero_index = 0;

  double coord(int idx) const { return (idx - zero_index) * step; }
  double min() const { return coord(0); }
  double max() const { return coord(count - 1); }
};

/// Uniform grid over the risky-position space R^{d-1} with multilinear
/// interpolation. Must contain the origin exactly.
class PositionGrid {
 public:
  PositionGrid() = default;
  PositionGrid(const std::vector<double>& min, const std::vector<double>& max,
               const std::vector<double>& step);

  int dims() const { return static_cast<int>(axes_.size()); }
  const GridAxis& axis(int j) const { return axes_[j]; }
  std::size_t size() const { return total_; }
  std::size_t zero_flat() const { return zero_flat_; }

  /// Decode a flat index into coordinates (out.size() == dims()).
  void point_at(std::size_t flat, std::span<double> out) const;
  /// Euclidean norm of the point at `flat`.
  double norm_at(std::size_t flat) const;
  /// True when any axis index is 0 or count-1.
  bool is_boundary(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> idx) const;

  /// Multilinear interpolation of a table over this grid, clamping
  /// coordinates to the grid range. `clamped` reports whether clamping fired.
  double interpolate(std::span<const double> table, std::span<const double> v,
                     bool* clamped = nullptr) const;

  /// Grid with every axis step halved (same range, superset of points).
  PositionGrid refined() const;

  bool operator==(const PositionGrid& other) const;

 private:
  void finalize();

  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
  std::size_t zero_flat_ = 0;
};

}  // namespace superhedge
