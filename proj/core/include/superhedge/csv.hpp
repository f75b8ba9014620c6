#pragma once

#include <string>
#include <vector>

#include "superhedge/solver.hpp"
#include "superhedge/support_model.hpp"

namespace superhedge {

/// Parses a comma-separated file into rows of trimmed cells. Blank lines and
/// lines starting with '#' are skipped; a leading non-numeric row is treated
/// as a header and dropped.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Transition table: columns t, parent state coords (m), child state coords (m).
std::vector<TableRow> load_table_rows(const std::string& path, int state_dim);

/// Payoff table: columns node_id, payoff cash, payoff risky coords (d-1).
/// Every terminal node id must appear exactly once.
std::vector<Position> load_payoff_table(const std::string& path,
                                        int risky_assets);

struct ConvergenceRow {
  double step = 0.0;
  double price = 0.0;
  double delta_from_finest = 0.0;
};

void write_value_surface(const std::string& path, const SolveResult& result,
                         const Instance& instance);
void write_rollout(const std::string& path, const RolloutReport& report,
                   const Instance& instance);
void write_convergence(const std::string& path,
                       const std::vector<ConvergenceRow>& rows);

}  // namespace superhedge
