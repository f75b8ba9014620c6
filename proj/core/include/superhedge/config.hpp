#pragma once

#include <optional>
#include <string>
#include <vector>

#include "superhedge/payoff.hpp"
#include "superhedge/solver.hpp"

namespace superhedge {

/// Parsed run configuration. The JSON schema is validated strictly: missing
/// required keys and unknown keys are ConfigError with the key named.
struct RunConfig {
  // market
  CostModelKind market_kind = CostModelKind::Proportional;
  int risky_assets = 1;
  int levels = 1;  // order book depth

  // support
  SupportKind support_kind = SupportKind::Multiplicative;
  std::vector<std::vector<double>> support_vectors;
  std::string support_csv;
  double recombine_tol = 1e-9;
  std::size_t node_cap = 1'000'000;

  // payoff
  PayoffKind payoff_kind = PayoffKind::Zero;
  double strike = 0.0;
  int asset = 0;
  std::vector<double> weights;
  bool strike_prepaid = true;
  std::string payoff_csv;

  // problem
  std::vector<double> initial_state;
  int horizon = 1;
  std::vector<double> grid_min, grid_max, grid_step;

  // solver + diagnostics
  SolverOptions solver;
  double tol_aip = 1e-8;
  double tol_saip = 1e-8;
  int sphere_count = 128;

  /// Directory CSV paths are resolved against (the config file's directory).
  std::string base_dir = ".";
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& json_text,
                            const std::string& base_dir = ".");

/// Builds the solvable instance, loading any CSV side files.
Instance make_instance(const RunConfig& config);

}  // namespace superhedge
