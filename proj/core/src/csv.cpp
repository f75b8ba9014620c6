#include "superhedge/csv.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace superhedge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

double parse_number(const std::string& s, const std::string& path) {
  if (!is_number(s))
    throw ConfigError("non-numeric cell '" + s + "' in " + path);
  return std::strtod(s.c_str(), nullptr);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(stripped);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    rows.push_back(std::move(cells));
  }
  if (!rows.empty() && !is_number(rows.front().front())) rows.erase(rows.begin());
  return rows;
}

std::vector<TableRow> load_table_rows(const std::string& path, int state_dim) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw ConfigError("transition table " + path + " is empty");
  std::vector<TableRow> out;
  const std::size_t want = 1 + 2 * static_cast<std::size_t>(state_dim);
  for (const auto& cells : rows) {
    if (cells.size() != want) {
      std::ostringstream os;
      os << path << ": expected " << want << " columns (t, parent x" << state_dim
         << ", child x" << state_dim << "), got " << cells.size();
      throw ConfigError(os.str());
    }
    TableRow row;
    row.t = static_cast<int>(parse_number(cells[0], path));
    for (int j = 0; j < state_dim; ++j)
      row.parent.push_back(parse_number(cells[1 + j], path));
    for (int j = 0; j < state_dim; ++j)
      row.child.push_back(parse_number(cells[1 + state_dim + j], path));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Position> load_payoff_table(const std::string& path,
                                        int risky_assets) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw ConfigError("payoff table " + path + " is empty");
  std::vector<Position> out(rows.size(), Position::zero(risky_assets));
  std::vector<bool> seen(rows.size(), false);
  const std::size_t want = 2 + static_cast<std::size_t>(risky_assets);
  for (const auto& cells : rows) {
    if (cells.size() != want) {
      std::ostringstream os;
      os << path << ": expected " << want
         << " columns (node_id, cash, risky x" << risky_assets << "), got "
         << cells.size();
      throw ConfigError(os.str());
    }
    const auto id = static_cast<std::size_t>(parse_number(cells[0], path));
    if (id >= rows.size() || seen[id])
      throw ConfigError(path + ": node ids must cover 0..N-1 exactly once");
    seen[id] = true;
    out[id].cash = parse_number(cells[1], path);
    for (int j = 0; j < risky_assets; ++j)
      out[id].risky[j] = parse_number(cells[2 + j], path);
  }
  return out;
}

void write_value_surface(const std::string& path, const SolveResult& result,
                         const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  const int m = instance.market->state_dim();
  const int dims = instance.grid.dims();
  out << "t,node_id";
  for (int j = 0; j < m; ++j) out << ",state_" << j;
  for (int j = 0; j < dims; ++j) out << ",v_" << j;
  out << ",gamma,theta";
  for (int j = 0; j < dims; ++j) out << ",argmin_" << j;
  out << "\n";

  std::vector<double> v(dims), y(dims);
  const int T = result.lattice->horizon();
  for (int t = 0; t <= T; ++t) {
    const auto& layer = result.layers[t];
    for (std::size_t n = 0; n < layer.gamma.size(); ++n) {
      const MarketState& s = result.lattice->state(t, static_cast<std::uint32_t>(n));
      for (std::size_t c = 0; c < instance.grid.size(); ++c) {
        instance.grid.point_at(c, v);
        out << t << ',' << n;
        for (int j = 0; j < m; ++j) out << ',' << fmt(s[j]);
        for (int j = 0; j < dims; ++j) out << ',' << fmt(v[j]);
        out << ',' << fmt(layer.gamma[n][c]) << ',';
        if (!layer.theta.empty()) out << fmt(layer.theta[n][c]);
        for (int j = 0; j < dims; ++j) {
          out << ',';
          if (t < T) {
            const auto arg = result.policy.at(t, static_cast<std::uint32_t>(n), c);
            if (arg != HedgePolicy::kNoAction) {
              instance.grid.point_at(arg, y);
              out << fmt(y[j]);
            }
          }
        }
        out << "\n";
      }
    }
  }
}

void write_rollout(const std::string& path, const RolloutReport& report,
                   const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  const int dims = instance.grid.dims();
  out << "path_id,t,node_id";
  for (int j = 0; j < dims; ++j) out << ",position_" << j;
  out << ",trade_cost,terminal_cash,shortfall\n";
  std::vector<double> y(dims);
  for (std::size_t p = 0; p < report.paths.size(); ++p) {
    const auto& pr = report.paths[p];
    const int T = static_cast<int>(pr.nodes.size()) - 1;
    for (int t = 0; t < T; ++t) {
      instance.grid.point_at(pr.position_cell[t], y);
      out << p << ',' << t << ',' << pr.nodes[t];
      for (int j = 0; j < dims; ++j) out << ',' << fmt(y[j]);
      out << ',' << fmt(pr.trade_costs[t]) << ",,\n";
    }
    out << p << ',' << T << ',' << pr.nodes[T];
    for (int j = 0; j < dims; ++j) out << ',';
    out << ',' << ',' << fmt(pr.terminal_cash) << ',' << fmt(pr.shortfall)
        << "\n";
  }
}

void write_convergence(const std::string& path,
                       const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "step,price,delta_from_finest\n";
  for (const auto& r : rows)
    out << fmt(r.step) << ',' << fmt(r.price) << ',' << fmt(r.delta_from_finest)
        << "\n";
}

}  // namespace superhedge
