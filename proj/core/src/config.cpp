#include "superhedge/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "superhedge/csv.hpp"

#include <json.hpp>

namespace superhedge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      fail("unknown key '" + it.key() + "' in " + where);
  }
}

const json& require(const json& obj, const std::string& where,
                    const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail("missing key '" + key + "' in " + where);
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + " must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, where));
  return out;
}

// Scalar entries broadcast to a full coordinate vector.
std::vector<std::vector<double>> as_vector_list(const json& v, int dim,
                                                const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where + " must be a nonempty array");
  std::vector<std::vector<double>> out;
  for (const auto& entry : v) {
    if (entry.is_number()) {
      out.emplace_back(dim, entry.get<double>());
    } else {
      auto vec = as_vector(entry, where);
      if (static_cast<int>(vec.size()) != dim) {
        std::ostringstream os;
        os << where << " entries must be scalars or arrays of length " << dim;
        fail(os.str());
      }
      out.push_back(std::move(vec));
    }
  }
  return out;
}

int state_dim_for(CostModelKind kind, int assets, int levels) {
  switch (kind) {
    case CostModelKind::Proportional:
      return 2 * assets;
    case CostModelKind::OrderBook:
      return assets * (4 * levels - 2);
    case CostModelKind::FixedCost:
      return 3 * assets;
    case CostModelKind::Custom:
      break;
  }
  fail("custom market models cannot be configured from JSON");
}

void parse_market(const json& m, RunConfig& cfg) {
  reject_unknown(m, "market", {"kind", "risky_assets", "levels"});
  const std::string kind = as_string(require(m, "market", "kind"), "market.kind");
  if (kind == "proportional")
    cfg.market_kind = CostModelKind::Proportional;
  else if (kind == "order_book")
    cfg.market_kind = CostModelKind::OrderBook;
  else if (kind == "fixed_cost")
    cfg.market_kind = CostModelKind::FixedCost;
  else
    fail("market.kind must be proportional, order_book or fixed_cost");
  if (m.contains("risky_assets"))
    cfg.risky_assets = as_int(m["risky_assets"], "market.risky_assets");
  if (cfg.risky_assets < 1) fail("market.risky_assets must be >= 1");
  if (m.contains("levels")) {
    if (cfg.market_kind != CostModelKind::OrderBook)
      fail("market.levels only applies to order_book markets");
    cfg.levels = as_int(m["levels"], "market.levels");
    if (cfg.levels < 1) fail("market.levels must be >= 1");
  }
}

void parse_support(const json& s, RunConfig& cfg, int state_dim) {
  reject_unknown(s, "support",
                 {"kind", "factors", "increments", "csv", "recombine_tol",
                  "node_cap"});
  const std::string kind = as_string(require(s, "support", "kind"), "support.kind");
  if (kind == "multiplicative") {
    cfg.support_kind = SupportKind::Multiplicative;
    cfg.support_vectors = as_vector_list(require(s, "support", "factors"),
                                         state_dim, "support.factors");
  } else if (kind == "additive") {
    cfg.support_kind = SupportKind::Additive;
    cfg.support_vectors = as_vector_list(require(s, "support", "increments"),
                                         state_dim, "support.increments");
  } else if (kind == "table") {
    cfg.support_kind = SupportKind::Table;
    cfg.support_csv = as_string(require(s, "support", "csv"), "support.csv");
  } else {
    fail("support.kind must be multiplicative, additive or table");
  }
  if (s.contains("recombine_tol"))
    cfg.recombine_tol = as_number(s["recombine_tol"], "support.recombine_tol");
  if (s.contains("node_cap")) {
    const int cap = as_int(s["node_cap"], "support.node_cap");
    if (cap < 1) fail("support.node_cap must be positive");
    cfg.node_cap = static_cast<std::size_t>(cap);
  }
}

void parse_payoff(const json& p, RunConfig& cfg) {
  reject_unknown(p, "payoff",
                 {"kind", "strike", "asset", "weights", "strike_prepaid", "csv"});
  const std::string kind = as_string(require(p, "payoff", "kind"), "payoff.kind");
  if (kind == "zero") {
    cfg.payoff_kind = PayoffKind::Zero;
    return;
  }
  if (kind == "cash_call")
    cfg.payoff_kind = PayoffKind::CashSettledCall;
  else if (kind == "cash_put")
    cfg.payoff_kind = PayoffKind::CashSettledPut;
  else if (kind == "physical_call")
    cfg.payoff_kind = PayoffKind::PhysicalCall;
  else if (kind == "basket_call")
    cfg.payoff_kind = PayoffKind::Basket;
  else if (kind == "table")
    cfg.payoff_kind = PayoffKind::CustomTable;
  else
    fail("payoff.kind must be zero, cash_call, cash_put, physical_call, "
         "basket_call or table");

  if (cfg.payoff_kind == PayoffKind::CustomTable) {
    cfg.payoff_csv = as_string(require(p, "payoff", "csv"), "payoff.csv");
    return;
  }
  cfg.strike = as_number(require(p, "payoff", "strike"), "payoff.strike");
  if (p.contains("asset")) cfg.asset = as_int(p["asset"], "payoff.asset");
  if (cfg.asset < 0 || cfg.asset >= cfg.risky_assets)
    fail("payoff.asset is out of range for market.risky_assets");
  if (cfg.payoff_kind == PayoffKind::Basket) {
    cfg.weights = as_vector(require(p, "payoff", "weights"), "payoff.weights");
    if (static_cast<int>(cfg.weights.size()) != cfg.risky_assets)
      fail("payoff.weights must have one entry per risky asset");
  }
  if (p.contains("strike_prepaid"))
    cfg.strike_prepaid = p["strike_prepaid"].get<bool>();
}

void parse_grid(const json& g, RunConfig& cfg) {
  reject_unknown(g, "grid", {"min", "max", "step"});
  auto broadcast = [&](const json& v, const char* name) {
    if (v.is_number())
      return std::vector<double>(cfg.risky_assets, v.get<double>());
    auto vec = as_vector(v, std::string("grid.") + name);
    if (static_cast<int>(vec.size()) != cfg.risky_assets)
      fail(std::string("grid.") + name + " must have one entry per risky asset");
    return vec;
  };
  cfg.grid_min = broadcast(require(g, "grid", "min"), "min");
  cfg.grid_max = broadcast(require(g, "grid", "max"), "max");
  cfg.grid_step = broadcast(require(g, "grid", "step"), "step");
}

void parse_solver(const json& s, RunConfig& cfg) {
  reject_unknown(s, "solver",
                 {"threads", "restrict_by_radius", "fallback_radius",
                  "radius_epsilon", "sphere_count", "null_space_reduction"});
  if (s.contains("null_space_reduction"))
    cfg.solver.use_null_space_reduction = s["null_space_reduction"].get<bool>();
  if (s.contains("threads"))
    cfg.solver.threads = as_int(s["threads"], "solver.threads");
  if (s.contains("restrict_by_radius"))
    cfg.solver.restrict_by_radius = s["restrict_by_radius"].get<bool>();
  if (s.contains("fallback_radius")) {
    const auto& f = s["fallback_radius"];
    if (f.is_string()) {
      const std::string v = f.get<std::string>();
      if (v == "auto") {
        cfg.solver.fallback_auto = true;
      } else if (v == "none") {
        cfg.solver.fallback_auto = false;
        cfg.solver.fallback_radius.reset();
      } else {
        fail("solver.fallback_radius must be a number, \"auto\" or \"none\"");
      }
    } else {
      cfg.solver.fallback_radius = as_number(f, "solver.fallback_radius");
    }
  }
  if (s.contains("radius_epsilon"))
    cfg.solver.radius_epsilon = as_number(s["radius_epsilon"], "solver.radius_epsilon");
  if (s.contains("sphere_count")) {
    cfg.sphere_count = as_int(s["sphere_count"], "solver.sphere_count");
    if (cfg.sphere_count < 2) fail("solver.sphere_count must be >= 2");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text,
                            const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config root must be a JSON object");
  reject_unknown(doc, "config",
                 {"horizon", "initial_state", "market", "support", "payoff",
                  "grid", "solver", "tolerances"});

  RunConfig cfg;
  cfg.base_dir = base_dir;
  parse_market(require(doc, "config", "market"), cfg);
  const int m = state_dim_for(cfg.market_kind, cfg.risky_assets, cfg.levels);
  parse_support(require(doc, "config", "support"), cfg, m);
  parse_payoff(require(doc, "config", "payoff"), cfg);
  parse_grid(require(doc, "config", "grid"), cfg);

  cfg.horizon = as_int(require(doc, "config", "horizon"), "horizon");
  if (cfg.horizon < 1) fail("horizon must be >= 1");
  cfg.initial_state = as_vector(require(doc, "config", "initial_state"),
                                "initial_state");
  if (static_cast<int>(cfg.initial_state.size()) != m) {
    std::ostringstream os;
    os << "initial_state has " << cfg.initial_state.size()
       << " coordinates, the market layout needs " << m;
    fail(os.str());
  }

  if (doc.contains("solver")) parse_solver(doc["solver"], cfg);
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    reject_unknown(t, "tolerances", {"aip", "saip"});
    if (t.contains("aip")) cfg.tol_aip = as_number(t["aip"], "tolerances.aip");
    if (t.contains("saip")) cfg.tol_saip = as_number(t["saip"], "tolerances.saip");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(),
                           std::filesystem::path(path).parent_path().string());
}

Instance make_instance(const RunConfig& cfg) {
  Instance inst;
  switch (cfg.market_kind) {
    case CostModelKind::Proportional:
      inst.market = std::make_shared<ProportionalModel>(cfg.risky_assets);
      break;
    case CostModelKind::OrderBook:
      inst.market = std::make_shared<OrderBookModel>(cfg.risky_assets, cfg.levels);
      break;
    case CostModelKind::FixedCost:
      inst.market = std::make_shared<FixedCostModel>(cfg.risky_assets);
      break;
    case CostModelKind::Custom:
      fail("custom market models cannot be configured from JSON");
  }

  auto resolve = [&](const std::string& rel) {
    const std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(cfg.base_dir) / p).string();
  };

  switch (cfg.support_kind) {
    case SupportKind::Multiplicative:
      inst.support = SupportModel::multiplicative(cfg.support_vectors);
      break;
    case SupportKind::Additive:
      inst.support = SupportModel::additive(cfg.support_vectors);
      break;
    case SupportKind::Table:
      inst.support = SupportModel::table(
          load_table_rows(resolve(cfg.support_csv), inst.market->state_dim()));
      break;
  }
  inst.support.recombine_tol = cfg.recombine_tol;

  switch (cfg.payoff_kind) {
    case PayoffKind::Zero:
      inst.payoff = Payoff::zero();
      break;
    case PayoffKind::CashSettledCall:
      inst.payoff = Payoff::cash_call(cfg.strike, cfg.asset);
      break;
    case PayoffKind::CashSettledPut:
      inst.payoff = Payoff::cash_put(cfg.strike, cfg.asset);
      break;
    case PayoffKind::PhysicalCall:
      inst.payoff = Payoff::physical_call(cfg.strike, cfg.asset, cfg.strike_prepaid);
      break;
    case PayoffKind::Basket:
      inst.payoff = Payoff::basket_call(cfg.weights, cfg.strike);
      break;
    case PayoffKind::CustomTable:
      inst.payoff = Payoff::custom_table(
          load_payoff_table(resolve(cfg.payoff_csv), cfg.risky_assets));
      break;
  }

  inst.initial_state = MarketState{cfg.initial_state};
  inst.horizon = cfg.horizon;
  inst.grid = PositionGrid(cfg.grid_min, cfg.grid_max, cfg.grid_step);
  inst.node_cap = cfg.node_cap;
  return inst;
}

}  // namespace superhedge
