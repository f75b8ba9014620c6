#include "superhedge/grid.hpp"

#include <cmath>
#include <sstream>

namespace superhedge {

PositionGrid::PositionGrid(const std::vector<double>& min,
                           const std::vector<double>& max,
                           const std::vector<double>& step) {
  if (min.empty() || min.size() != max.size() || min.size() != step.size())
    throw ConfigError("grid min/max/step must be nonempty and equally sized");
  if (min.size() > 16) throw ConfigError("grid supports at most 16 axes");
  axes_.resize(min.size());
  for (std::size_t j = 0; j < min.size(); ++j) {
    if (!(step[j] > 0.0)) throw ConfigError("grid step must be positive");
    if (min[j] == 0.0 && max[j] == 0.0) {
      // Axis pinned at the origin: the only candidate position is 0.
      GridAxis ax;
      ax.step = step[j];
      ax.zero_index = 0;
      ax.count = 1;
      axes_[j] = ax;
      continue;
    }
    if (!(min[j] < max[j])) throw ConfigError("grid min must be below max");
    if (min[j] > 0.0 || max[j] < 0.0)
      throw ConfigError("grid must contain 0 (the initial position)");
    const double zi = -min[j] / step[j];
    const double ni = (max[j] - min[j]) / step[j];
    GridAxis ax;
    ax.step = step[j];
    ax.zero_index = static_cast<int>(std::llround(zi));
    ax.count = static_cast<int>(std::llround(ni)) + 1;
    if (std::fabs(zi - std::llround(zi)) > 1e-9 * (1.0 + std::fabs(zi)) ||
        std::fabs(ni - std::llround(ni)) > 1e-9 * (1.0 + std::fabs(ni))) {
      std::ostringstream os;
      os << "grid axis " << j << " does not contain 0 exactly "
         << "(min and max must be integer multiples of step)";
      throw ConfigError(os.str());
    }
    if (ax.count < 2) throw ConfigError("grid axis needs at least two points");
    axes_[j] = ax;
  }
  finalize();
}

void PositionGrid::finalize() {
  strides_.assign(axes_.size(), 1);
  total_ = 1;
  for (int j = dims() - 1; j >= 0; --j) {
    strides_[j] = total_;
    total_ *= static_cast<std::size_t>(axes_[j].count);
  }
  zero_flat_ = 0;
  for (int j = 0; j < dims(); ++j)
    zero_flat_ += static_cast<std::size_t>(axes_[j].zero_index) * strides_[j];
}

void PositionGrid::point_at(std::size_t flat, std::span<double> out) const {
  for (int j = 0; j < dims(); ++j) {
    const std::size_t idx = (flat / strides_[j]) % axes_[j].count;
    out[j] = axes_[j].coord(static_cast<int>(idx));
  }
}

double PositionGrid::norm_at(std::size_t flat) const {
  double sum = 0.0;
  for (int j = 0; j < dims(); ++j) {
    const std::size_t idx = (flat / strides_[j]) % axes_[j].count;
    const double c = axes_[j].coord(static_cast<int>(idx));
    sum += c * c;
  }
  return std::sqrt(sum);
}

bool PositionGrid::is_boundary(std::size_t flat) const {
  for (int j = 0; j < dims(); ++j) {
    const std::size_t idx = (flat / strides_[j]) % axes_[j].count;
    if (idx == 0 || idx + 1 == static_cast<std::size_t>(axes_[j].count))
      return true;
  }
  return false;
}

std::size_t PositionGrid::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int j = 0; j < dims(); ++j)
    flat += static_cast<std::size_t>(idx[j]) * strides_[j];
  return flat;
}

double PositionGrid::interpolate(std::span<const double> table,
                                 std::span<const double> v,
                                 bool* clamped) const {
  if (clamped) *clamped = false;
  // Locate the cell and the fractional offset per axis.
  int lo[16];
  double w[16];
  for (int j = 0; j < dims(); ++j) {
    const auto& ax = axes_[j];
    if (ax.count == 1) {
      if (v[j] != 0.0 && clamped) *clamped = true;
      lo[j] = 0;
      w[j] = 0.0;
      continue;
    }
    double pos = (v[j] - ax.min()) / ax.step;
    if (pos <= 0.0) {
      if (pos < 0.0 && clamped) *clamped = true;
      lo[j] = 0;
      w[j] = 0.0;
    } else if (pos >= ax.count - 1) {
      if (pos > ax.count - 1 && clamped) *clamped = true;
      lo[j] = ax.count - 2;
      w[j] = 1.0;
    } else {
      lo[j] = static_cast<int>(pos);
      w[j] = pos - lo[j];
    }
  }
  const int n_corners = 1 << dims();
  double value = 0.0;
  for (int corner = 0; corner < n_corners; ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (int j = 0; j < dims(); ++j) {
      const int bit = (corner >> j) & 1;
      weight *= bit ? w[j] : 1.0 - w[j];
      flat += static_cast<std::size_t>(lo[j] + bit) * strides_[j];
    }
    if (weight != 0.0) value += weight * table[flat];
  }
  return value;
}

PositionGrid PositionGrid::refined() const {
  PositionGrid out;
  out.axes_ = axes_;
  for (auto& ax : out.axes_) {
    ax.step *= 0.5;
    ax.zero_index *= 2;
    ax.count = 2 * ax.count - 1;
  }
  out.finalize();
  return out;
}

bool PositionGrid::operator==(const PositionGrid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (axes_[j].step != other.axes_[j].step ||
        axes_[j].count != other.axes_[j].count ||
        axes_[j].zero_index != other.axes_[j].zero_index)
      return false;
  }
  return true;
}

}  // namespace superhedge
