#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "superhedge/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"superhedge: minimal super-hedging costs under transaction costs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = -1;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    cmd->add_option("--out-dir", out_dir, "directory for CSV side files");
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    cmd->add_flag("--verbose", verbose, "timing and progress on stderr");
  };

  auto* price = app.add_subcommand("price", "solve for the minimal hedging cost");
  add_common(price);

  auto* check = app.add_subcommand("check", "run the no-arbitrage diagnostics");
  add_common(check);

  auto* hedge = app.add_subcommand("hedge", "roll the hedge policy along every path");
  add_common(hedge);
  double cash = 0.0;
  auto* cash_opt = hedge->add_option(
      "--cash", cash, "initial cash (defaults to the computed price)");

  auto* converge = app.add_subcommand("converge", "price across grid refinements");
  add_common(converge);
  int levels = 4;
  converge->add_option("--levels", levels, "number of refinement levels");

  CLI11_PARSE(app, argc, argv);

  superhedge::RunConfig config;
  try {
    config = superhedge::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return superhedge::kConfigError;
  }

  superhedge::CommandOptions options;
  options.out_dir = out_dir;
  options.verbose = verbose;
  if (threads >= 0) options.threads = threads;

  superhedge::CommandResult result;
  if (price->parsed()) {
    result = superhedge::run_price(config, options);
  } else if (check->parsed()) {
    result = superhedge::run_check(config, options);
  } else if (hedge->parsed()) {
    std::optional<double> initial_cash;
    if (cash_opt->count() > 0) initial_cash = cash;
    result = superhedge::run_hedge(config, options, initial_cash);
  } else {
    result = superhedge::run_converge(config, options, levels);
  }
  std::cout << result.json_text;
  return result.exit_code;
}
