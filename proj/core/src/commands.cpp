#include "superhedge/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>

#include "superhedge/arbitrage.hpp"
#include "superhedge/csv.hpp"
#include "superhedge/oracle.hpp"

#include <json.hpp>

namespace superhedge {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json num_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

ordered_json arbitrage_json(const ArbitrageReport& report) {
  ordered_json out;
  out["tol_aip"] = report.tol_aip;
  out["tol_saip"] = report.tol_saip;
  out["sphere_count"] = report.sphere_count;
  out["aip"] = report.aip_all();
  out["saip"] = report.saip_all();
  ordered_json times = ordered_json::array();
  for (const auto& d : report.times) {
    ordered_json row;
    row["t"] = d.t;
    row["aip"] = d.aip;
    row["aip_residual"] = num_or_null(d.aip_residual);
    row["boundary_hit"] = d.boundary_hit;
    if (d.saip.has_value()) {
      row["saip"] = *d.saip;
      row["sphere_inf"] = num_or_null(*d.sphere_inf);
    }
    if (d.laip_applicable) {
      row["laip"] = *d.laip;
      row["null_space_dim"] = d.null_space_dim;
    }
    if (d.horizon_saip.has_value()) {
      row["horizon_saip"] = *d.horizon_saip;
      row["horizon_sphere_inf"] = num_or_null(*d.horizon_sphere_inf);
    }
    times.push_back(std::move(row));
  }
  out["times"] = std::move(times);
  return out;
}

ordered_json layer_stats_json(const Diagnostics& diag) {
  ordered_json layers = ordered_json::array();
  for (const auto& s : diag.layers) {
    ordered_json row;
    row["t"] = s.t;
    row["gamma_min"] = num_or_null(s.gamma_min);
    row["gamma_max"] = num_or_null(s.gamma_max);
    row["sphere_inf"] = num_or_null(s.sphere_inf);
    row["used_horizon_sphere"] = s.used_horizon_sphere;
    row["fallback_engaged"] = s.fallback_engaged;
    row["radius_min"] = num_or_null(s.radius_min);
    row["radius_max"] = num_or_null(s.radius_max);
    row["avg_candidates"] = s.avg_candidates;
    row["boundary_argmin"] = s.boundary_argmin;
    row["null_axes_dropped"] = s.null_axes_dropped;
    layers.push_back(std::move(row));
  }
  return layers;
}

SolverOptions effective_options(const RunConfig& config,
                                const CommandOptions& options) {
  SolverOptions opts = config.solver;
  if (options.threads.has_value()) opts.threads = *options.threads;
  return opts;
}

std::string out_path(const CommandOptions& options, const char* name) {
  return (std::filesystem::path(options.out_dir) / name).string();
}

void ensure_out_dir(const CommandOptions& options) {
  if (!options.out_dir.empty())
    std::filesystem::create_directories(options.out_dir);
}

CommandResult finish(int code, const ordered_json& doc) {
  return CommandResult{code, doc.dump(2) + "\n"};
}

CommandResult guarded(const CommandOptions& options,
                      const std::function<CommandResult()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CommandResult res;
  try {
    res = body();
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    std::cerr << "error: " << e.what() << "\n";
    return finish(exit_code_for(e), err);
  }
  if (options.verbose) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    std::cerr << "elapsed: " << ms << " ms\n";
  }
  return res;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const LayoutMismatch*>(&e)) return kConfigError;
  if (dynamic_cast<const InvalidState*>(&e)) return kConfigError;
  if (dynamic_cast<const NotHedgeable*>(&e)) return kNotHedgeable;
  if (dynamic_cast<const RadiusDegenerate*>(&e)) return kRadiusDegenerate;
  return kInternalError;
}

CommandResult run_price(const RunConfig& config, const CommandOptions& options) {
  return guarded(options, [&]() {
    Instance inst = make_instance(config);
    Solver solver(inst, effective_options(config, options));
    SolveResult result = solver.solve();
    const auto arbitrage = check_arbitrage(solver, config.tol_aip,
                                           config.tol_saip, config.sphere_count);
    ordered_json doc;
    doc["command"] = "price";
    doc["price"] = result.price;
    doc["layers"] = layer_stats_json(result.diagnostics);
    doc["arbitrage"] = arbitrage_json(arbitrage);
    if (!options.out_dir.empty()) {
      ensure_out_dir(options);
      write_value_surface(out_path(options, "value_surface.csv"), result, inst);
    }
    return finish(kOk, doc);
  });
}

CommandResult run_check(const RunConfig& config, const CommandOptions& options) {
  return guarded(options, [&]() {
    Instance inst = make_instance(config);
    Solver solver(inst, effective_options(config, options));
    const auto arbitrage = check_arbitrage(solver, config.tol_aip,
                                           config.tol_saip, config.sphere_count);
    ordered_json doc;
    doc["command"] = "check";
    doc["arbitrage"] = arbitrage_json(arbitrage);
    return finish(kOk, doc);
  });
}

CommandResult run_hedge(const RunConfig& config, const CommandOptions& options,
                        std::optional<double> initial_cash) {
  return guarded(options, [&]() {
    Instance inst = make_instance(config);
    Solver solver(inst, effective_options(config, options));
    SolveResult result = solver.solve();
    const double cash = initial_cash.value_or(result.price);
    const RolloutReport report = rollout(result, inst, cash);
    ordered_json doc;
    doc["command"] = "hedge";
    doc["price"] = result.price;
    doc["initial_cash"] = cash;
    doc["paths"] = report.paths.size();
    doc["worst_shortfall"] = num_or_null(report.worst_shortfall);
    if (!options.out_dir.empty()) {
      ensure_out_dir(options);
      write_rollout(out_path(options, "rollout_paths.csv"), report, inst);
    }
    return finish(kOk, doc);
  });
}

CommandResult run_converge(const RunConfig& config,
                           const CommandOptions& options, int levels) {
  return guarded(options, [&]() {
    if (levels < 1) throw ConfigError("refinement levels must be >= 1");
    Instance inst = make_instance(config);
    std::vector<ConvergenceRow> rows;
    for (int level = 0; level < levels; ++level) {
      Solver solver(inst, effective_options(config, options));
      const SolveResult result = solver.solve();
      double step = 0.0;
      for (int j = 0; j < inst.grid.dims(); ++j)
        step = std::fmax(step, inst.grid.axis(j).step);
      rows.push_back({step, result.price, 0.0});
      if (level + 1 < levels) inst.grid = inst.grid.refined();
    }
    const double finest = rows.back().price;
    for (auto& r : rows) r.delta_from_finest = r.price - finest;
    double worst_increase = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      worst_increase = std::fmax(worst_increase, rows[i].price - rows[i - 1].price);

    ordered_json doc;
    doc["command"] = "converge";
    doc["levels"] = levels;
    ordered_json table = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row;
      row["step"] = r.step;
      row["price"] = r.price;
      row["delta_from_finest"] = r.delta_from_finest;
      table.push_back(std::move(row));
    }
    doc["table"] = std::move(table);
    doc["monotone_nonincreasing"] = worst_increase <= 1e-9;
    doc["worst_increase"] = worst_increase;
    if (!options.out_dir.empty()) {
      ensure_out_dir(options);
      write_convergence(out_path(options, "convergence.csv"), rows);
    }
    return finish(kOk, doc);
  });
}

}  // namespace superhedge
