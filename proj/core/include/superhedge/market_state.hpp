#pragma once

#include <span>
#include <vector>

namespace superhedge {

/// Point in R^m describing the prices/volumes a cost model reads.
/// The coordinate layout is fixed by the cost model (see CostModel docs).
struct MarketState {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
};

/// Portfolio position: cash (the e_1 coordinate) plus d-1 risky holdings.
struct Position {
  double cash = 0.0;
  std::vector<double> risky;

  static Position zero(std::size_t risky_assets) {
    return Position{0.0, std::vector<double>(risky_assets, 0.0)};
  }
};

inline Position operator-(const Position& z) {
  Position out{-z.cash, z.risky};
  for (auto& x : out.risky) x = -x;
  return out;
}

inline Position operator-(const Position& a, const Position& b) {
  Position out = a;
  out.cash -= b.cash;
  for (std::size_t i = 0; i < out.risky.size(); ++i) out.risky[i] -= b.risky[i];
  return out;
}

inline Position operator+(const Position& a, const Position& b) {
  Position out = a;
  out.cash += b.cash;
  for (std::size_t i = 0; i < out.risky.size(); ++i) out.risky[i] += b.risky[i];
  return out;
}

}  // namespace superhedge
