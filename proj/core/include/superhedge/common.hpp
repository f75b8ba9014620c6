#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace superhedge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for all domain errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class EmptySupport : public Error {
 public:
  using Error::Error;
};

class Explosion : public Error {
 public:
  using Error::Error;
};

class NegativePayoff : public Error {
 public:
  using Error::Error;
};

class NotHedgeable : public Error {
 public:
  using Error::Error;
};

class RadiusDegenerate : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ArbitrageParams : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Combined absolute/relative comparison used throughout the numeric checks.
inline bool almost_equal(double a, double b, double abs_tol = 1e-9,
                         double rel_tol = 1e-9) {
  if (a == b) return true;
  const double diff = std::fabs(a - b);
  return diff <= abs_tol + rel_tol * std::fmax(std::fabs(a), std::fabs(b));
}

inline bool is_finite(double x) { return std::isfinite(x); }

}  // namespace superhedge
