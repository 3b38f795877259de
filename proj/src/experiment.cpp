#include "ddlab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include "ddlab/errors.hpp"
#include "ddlab/expectation.hpp"
#include "ddlab/frontier.hpp"
#include "ddlab/return_model.hpp"
#include "ddlab/simulator.hpp"

namespace ddlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

// ---- typed config access, every failure a ConfigError ----

const json* find_key(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require_key(const json& obj, const char* key, const std::string& ctx) {
  const json* v = find_key(obj, key);
  if (v == nullptr) throw ConfigError(ctx + ": missing required key \"" + key + "\"");
  return *v;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(ctx + ": unknown key \"" + item.key() + "\"");
  }
}

double as_double(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw ConfigError(ctx + " must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& ctx) {
  if (!v.is_boolean()) throw ConfigError(ctx + " must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw ConfigError(ctx + " must be a string");
  return v.get<std::string>();
}

std::uint64_t as_u64(const json& v, const std::string& ctx) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const std::int64_t i = v.get<std::int64_t>();
    if (i >= 0) return static_cast<std::uint64_t>(i);
  }
  throw ConfigError(ctx + " must be a nonnegative integer");
}

int as_int(const json& v, const std::string& ctx, int min_value) {
  if (!v.is_number_integer()) throw ConfigError(ctx + " must be an integer");
  const std::int64_t i = v.get<std::int64_t>();
  if (i < min_value || i > 1'000'000'000) {
    throw ConfigError(ctx + " must be between " + std::to_string(min_value) + " and 1e9");
  }
  return static_cast<int>(i);
}

std::vector<double> as_double_array(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw ConfigError(ctx + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_double(v[i], ctx + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// ---- shared sections ----

ReturnDistribution parse_model(const json& config, json& resolved) {
  const json& m = require_key(config, "model", "config");
  if (!m.is_object()) throw ConfigError("model must be a JSON object");
  const std::string type = as_string(require_key(m, "type", "model"), "model.type");
  if (type == "coin") {
    check_keys(m, {"type", "win", "loss", "p_win"}, "model");
    CoinSpec spec;
    spec.win = as_double(require_key(m, "win", "model"), "model.win");
    spec.loss = as_double(require_key(m, "loss", "model"), "model.loss");
    spec.p_win = as_double(require_key(m, "p_win", "model"), "model.p_win");
    resolved["model"] = {
        {"type", "coin"}, {"win", spec.win}, {"loss", spec.loss}, {"p_win", spec.p_win}};
    return make_coin(spec);
  }
  if (type == "discrete") {
    check_keys(m, {"type", "values", "probs"}, "model");
    const std::vector<double> values =
        as_double_array(require_key(m, "values", "model"), "model.values");
    const std::vector<double> probs =
        as_double_array(require_key(m, "probs", "model"), "model.probs");
    if (values.size() != probs.size()) {
      throw ConfigError("model.values and model.probs must have equal length");
    }
    std::vector<Outcome> outcomes(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) outcomes[i] = {values[i], probs[i]};
    resolved["model"] = {{"type", "discrete"}, {"values", values}, {"probs", probs}};
    return ReturnDistribution::from_outcomes(std::move(outcomes));
  }
  throw ConfigError("model.type must be \"coin\" or \"discrete\"");
}

SimulationConfig parse_sim(const json& config, json& resolved) {
  const json& s = require_key(config, "sim", "config");
  check_keys(s, {"v0", "n_stages"}, "sim");
  SimulationConfig cfg;
  if (const json* v0 = find_key(s, "v0")) cfg.v0 = as_double(*v0, "sim.v0");
  cfg.n_stages = as_int(require_key(s, "n_stages", "sim"), "sim.n_stages", 1);
  validate(cfg);
  resolved["sim"] = {{"v0", cfg.v0}, {"n_stages", cfg.n_stages}};
  return cfg;
}

// threads is excluded from the resolved block on purpose: results never
// depend on it, and provenance must not either.
EstimatorOptions parse_estimator(const json& config, const RunOptions& opts,
                                 json& resolved) {
  const json& e = require_key(config, "estimator", "config");
  check_keys(e, {"method", "paths", "seed", "threads", "enumeration_cap"}, "estimator");
  EstimatorOptions opt;
  const std::string method =
      as_string(require_key(e, "method", "estimator"), "estimator.method");
  if (method == "monte_carlo") {
    opt.method = EstimatorMethod::monte_carlo;
  } else if (method == "enumeration") {
    opt.method = EstimatorMethod::enumeration;
  } else {
    throw ConfigError("estimator.method must be \"enumeration\" or \"monte_carlo\"");
  }
  if (const json* v = find_key(e, "paths")) opt.paths = as_u64(*v, "estimator.paths");
  if (opt.paths == 0) throw ConfigError("estimator.paths must be >= 1");
  if (const json* v = find_key(e, "seed")) opt.seed = as_u64(*v, "estimator.seed");
  if (opts.seed.has_value()) opt.seed = *opts.seed;
  if (const json* v = find_key(e, "enumeration_cap")) {
    opt.enumeration_cap = as_u64(*v, "estimator.enumeration_cap");
    if (opt.enumeration_cap == 0) throw ConfigError("estimator.enumeration_cap must be >= 1");
  }
  opt.threads = 0;
  if (const json* v = find_key(e, "threads")) {
    opt.threads = as_int(*v, "estimator.threads", 0);
  }
  if (opts.threads >= 0) opt.threads = opts.threads;
  json r = {{"method", method}};
  if (opt.method == EstimatorMethod::monte_carlo) {
    r["paths"] = opt.paths;
    r["seed"] = opt.seed;
  } else {
    r["enumeration_cap"] = opt.enumeration_cap;
  }
  resolved["estimator"] = std::move(r);
  return opt;
}

Strategy parse_strategy(const json& config, const ReturnDistribution& dist,
                        json& resolved) {
  const json& s = require_key(config, "strategy", "config");
  if (!s.is_object()) throw ConfigError("strategy must be a JSON object");
  const std::string type = as_string(require_key(s, "type", "strategy"), "strategy.type");
  Strategy built;
  if (type == "markowitz") {
    check_keys(s, {"type", "k", "cash_financed"}, "strategy");
    MarkowitzStrategy st;
    st.k_gain = as_double(require_key(s, "k", "strategy"), "strategy.k");
    st.cash_financed = true;
    if (const json* v = find_key(s, "cash_financed")) {
      st.cash_financed = as_bool(*v, "strategy.cash_financed");
    }
    resolved["strategy"] = {
        {"type", "markowitz"}, {"k", st.k_gain}, {"cash_financed", st.cash_financed}};
    built = st;
  } else if (type == "modulated") {
    check_keys(s, {"type", "gamma", "d_max", "cash_financed"}, "strategy");
    ModulatedStrategy st;
    st.gamma = as_double(require_key(s, "gamma", "strategy"), "strategy.gamma");
    st.d_max = as_double(require_key(s, "d_max", "strategy"), "strategy.d_max");
    st.cash_financed = true;
    if (const json* v = find_key(s, "cash_financed")) {
      st.cash_financed = as_bool(*v, "strategy.cash_financed");
    }
    resolved["strategy"] = {{"type", "modulated"},
                            {"gamma", st.gamma},
                            {"d_max", st.d_max},
                            {"cash_financed", st.cash_financed}};
    built = st;
  } else {
    throw ConfigError("strategy.type must be \"markowitz\" or \"modulated\"");
  }
  const AdmissibilityReport rep = check_admissible(built, dist);
  if (!rep.admissible) throw ConfigError("strategy: " + rep.summary());
  return built;
}

// Search grids accept an explicit array or a point count for the defaults.
std::vector<double> parse_dmax_grid(const json* v) {
  if (v == nullptr) return default_dmax_grid();
  if (v->is_number_integer()) return default_dmax_grid(as_int(*v, "dmax_grid", 1));
  return as_double_array(*v, "dmax_grid");
}

std::vector<double> parse_gamma_grid(const json* v, const ReturnDistribution& dist,
                                     const std::vector<double>& dmax_grid) {
  if (v == nullptr) return default_gamma_grid(dist, dmax_grid);
  if (v->is_number_integer()) {
    return default_gamma_grid(dist, dmax_grid, as_int(*v, "gamma_grid", 2));
  }
  return as_double_array(*v, "gamma_grid");
}

// ---- output plumbing ----

fs::path prepare_dir(const std::string& out_dir) {
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  return dir;
}

std::ofstream open_text(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write output file " + p.string());
  return out;
}

void write_json_doc(const fs::path& p, const json& doc, RunOutcome& outcome) {
  std::ofstream out = open_text(p);
  out << doc.dump(2) << '\n';
  outcome.files_written.push_back(p.string());
}

std::ofstream open_csv(const fs::path& p, const json& resolved, const char* header,
                       RunOutcome& outcome) {
  std::ofstream out = open_text(p);
  out << "# config: " << resolved.dump() << '\n' << header << '\n';
  outcome.files_written.push_back(p.string());
  return out;
}

json estimate_json(const RiskReturnEstimate& e) {
  return {{"mean_return", e.mean_return},
          {"mean_max_drawdown", e.mean_max_drawdown},
          {"std_error_return", e.std_error_return},
          {"std_error_drawdown", e.std_error_drawdown}};
}

json modulated_point_json(const FrontierPoint& p) {
  const auto& st = std::get<ModulatedStrategy>(p.params);
  json j = estimate_json(p.estimate);
  j["gamma"] = st.gamma;
  j["d_max"] = st.d_max;
  return j;
}

void write_markowitz_csv(const fs::path& p, const json& resolved,
                         const std::vector<FrontierPoint>& points,
                         const ReturnDistribution& dist, int n_stages,
                         RunOutcome& outcome) {
  std::ofstream out = open_csv(
      p, resolved,
      "k,mean_return,mean_max_drawdown,std_error_return,std_error_drawdown,"
      "closed_form_return,worst_case_drawdown",
      outcome);
  for (const FrontierPoint& pt : points) {
    const double k = std::get<MarkowitzStrategy>(pt.params).k_gain;
    out << fmt17(k) << ',' << fmt17(pt.estimate.mean_return) << ','
        << fmt17(pt.estimate.mean_max_drawdown) << ','
        << fmt17(pt.estimate.std_error_return) << ','
        << fmt17(pt.estimate.std_error_drawdown) << ','
        << fmt17(markowitz_expected_return(k, dist.mean(), n_stages)) << ','
        << fmt17(markowitz_worst_case_drawdown(k, dist, n_stages)) << '\n';
  }
}

// ---- modes ----

void do_simulate(const json& config, const RunOptions& opts, const fs::path& dir,
                 RunOutcome& outcome) {
  check_keys(config,
             {"mode", "model", "sim", "strategy", "seed", "path_index", "returns_override"},
             "config");
  json resolved{{"mode", "simulate"}};
  const ReturnDistribution dist = parse_model(config, resolved);
  const SimulationConfig sim = parse_sim(config, resolved);
  const Strategy strat = parse_strategy(config, dist, resolved);

  std::uint64_t seed = 0;
  if (opts.seed.has_value()) {
    seed = *opts.seed;
  } else {
    seed = as_u64(require_key(config, "seed", "config"), "seed");
  }
  std::uint64_t path_index = 0;
  if (const json* v = find_key(config, "path_index")) path_index = as_u64(*v, "path_index");
  resolved["seed"] = seed;
  resolved["path_index"] = path_index;

  std::vector<double> returns;
  if (const json* v = find_key(config, "returns_override")) {
    returns = as_double_array(*v, "returns_override");
    if (returns.size() != static_cast<std::size_t>(sim.n_stages)) {
      throw ConfigError("returns_override must list exactly sim.n_stages values");
    }
    for (std::size_t i = 0; i < returns.size(); ++i) {
      bool member = false;
      for (std::size_t j = 0; j < dist.size(); ++j) {
        if (returns[i] == dist.value(j)) {
          member = true;
          break;
        }
      }
      if (!member) {
        throw ConfigError("returns_override[" + std::to_string(i) +
                          "] is not an outcome of the model");
      }
    }
    resolved["returns_override"] = returns;
  } else {
    returns = sample_path(dist, sim.n_stages, seed, path_index);
  }

  std::vector<TrajectoryRow> trajectory;
  const PathStats stats = run_path(strat, sim, returns, &trajectory);

  std::ofstream csv = open_csv(dir / "trajectory.csv", resolved,
                               "stage,value,peak,drawdown,investment,outcome", outcome);
  for (const TrajectoryRow& row : trajectory) {
    csv << row.k << ',' << fmt17(row.v) << ',' << fmt17(row.v_max) << ',' << fmt17(row.d)
        << ',' << fmt17(row.investment) << ',' << fmt17(row.x) << '\n';
  }

  const json summary = {{"config", resolved},
                        {"stats",
                         {{"final_value", stats.final_value},
                          {"overall_return", stats.overall_return},
                          {"max_pct_drawdown", stats.max_pct_drawdown},
                          {"max_abs_drawdown", stats.max_abs_drawdown},
                          {"log_growth", finite_or_null(stats.log_growth)}}}};
  write_json_doc(dir / "summary.json", summary, outcome);
}

void do_sweep_markowitz(const json& config, const RunOptions& opts, const fs::path& dir,
                        RunOutcome& outcome) {
  check_keys(config, {"mode", "model", "sim", "estimator", "k_grid"}, "config");
  json resolved{{"mode", "sweep_markowitz"}};
  const ReturnDistribution dist = parse_model(config, resolved);
  const SimulationConfig sim = parse_sim(config, resolved);
  const EstimatorOptions est = parse_estimator(config, opts, resolved);
  const std::vector<double> k_grid =
      as_double_array(require_key(config, "k_grid", "config"), "k_grid");
  resolved["k_grid"] = k_grid;

  const std::vector<FrontierPoint> points = markowitz_curve(k_grid, dist, sim, est);
  write_markowitz_csv(dir / "sweep.csv", resolved, points, dist, sim.n_stages, outcome);
}

void do_frontier(const json& config, const RunOptions& opts, const fs::path& dir,
                 RunOutcome& outcome) {
  check_keys(config,
             {"mode", "model", "sim", "estimator", "targets", "tolerance", "cash_financed",
              "gamma_grid", "dmax_grid", "markowitz_k_grid"},
             "config");
  json resolved{{"mode", "frontier"}};
  const ReturnDistribution dist = parse_model(config, resolved);
  const SimulationConfig sim = parse_sim(config, resolved);

  FrontierQuery q;
  q.backend = parse_estimator(config, opts, resolved);
  q.dmax_grid = parse_dmax_grid(find_key(config, "dmax_grid"));
  q.gamma_grid = parse_gamma_grid(find_key(config, "gamma_grid"), dist, q.dmax_grid);
  if (const json* v = find_key(config, "tolerance")) {
    q.tolerance = as_double(*v, "tolerance");
    if (q.tolerance < 0.0) throw ConfigError("tolerance must be nonnegative");
  }
  if (const json* v = find_key(config, "cash_financed")) {
    q.cash_financed = as_bool(*v, "cash_financed");
  }
  const std::vector<double> targets =
      as_double_array(require_key(config, "targets", "config"), "targets");
  if (targets.empty()) throw ConfigError("targets must be nonempty");
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("targets entries must lie in [0, 1]");
  }
  resolved["gamma_grid"] = q.gamma_grid;
  resolved["dmax_grid"] = q.dmax_grid;
  resolved["tolerance"] = q.tolerance;
  resolved["cash_financed"] = q.cash_financed;
  resolved["targets"] = targets;

  const std::vector<FrontierPoint> evaluated = evaluate_modulated_grid(q, dist, sim);

  std::ofstream csv = open_csv(dir / "frontier.csv", resolved,
                               "gamma,d_max,mean_return,mean_max_drawdown,"
                               "std_error_return,std_error_drawdown,feasible",
                               outcome);
  for (const FrontierPoint& p : evaluated) {
    const auto& st = std::get<ModulatedStrategy>(p.params);
    bool feasible = false;  // within the band of at least one target
    for (double t : targets) {
      feasible = feasible || std::abs(p.estimate.mean_max_drawdown - t) <= q.tolerance;
    }
    csv << fmt17(st.gamma) << ',' << fmt17(st.d_max) << ',' << fmt17(p.estimate.mean_return)
        << ',' << fmt17(p.estimate.mean_max_drawdown) << ','
        << fmt17(p.estimate.std_error_return) << ',' << fmt17(p.estimate.std_error_drawdown)
        << ',' << (feasible ? 1 : 0) << '\n';
  }

  json optima = json::array();
  for (double t : targets) {
    const FrontierSelection sel = select_for_target(evaluated, t, q.tolerance);
    json entry{{"target", t}, {"feasible", sel.best.has_value()}};
    entry["best"] = sel.best.has_value() ? modulated_point_json(*sel.best) : json();
    if (sel.nearest.has_value()) entry["nearest"] = modulated_point_json(*sel.nearest);
    optima.push_back(std::move(entry));
  }
  write_json_doc(dir / "optima.json", json{{"config", resolved}, {"optima", optima}},
                 outcome);

  if (const json* v = find_key(config, "markowitz_k_grid")) {
    const std::vector<double> k_grid = as_double_array(*v, "markowitz_k_grid");
    resolved["markowitz_k_grid"] = k_grid;
    const std::vector<FrontierPoint> curve = markowitz_curve(k_grid, dist, sim, q.backend);
    write_markowitz_csv(dir / "markowitz.csv", resolved, curve, dist, sim.n_stages,
                        outcome);
  }
}

void do_certify(const json& config, const RunOptions& opts, const fs::path& dir,
                RunOutcome& outcome) {
  check_keys(config,
             {"mode", "model", "sim", "estimator", "k_grid", "tolerance", "cash_financed",
              "gamma_grid", "dmax_grid"},
             "config");
  json resolved{{"mode", "certify"}};
  const ReturnDistribution dist = parse_model(config, resolved);
  const SimulationConfig sim = parse_sim(config, resolved);

  FrontierQuery tmpl;
  tmpl.target_drawdown = 0.0;  // per-baseline targets are derived, not configured
  tmpl.backend = parse_estimator(config, opts, resolved);
  tmpl.dmax_grid = parse_dmax_grid(find_key(config, "dmax_grid"));
  tmpl.gamma_grid = parse_gamma_grid(find_key(config, "gamma_grid"), dist, tmpl.dmax_grid);
  if (const json* v = find_key(config, "tolerance")) {
    tmpl.tolerance = as_double(*v, "tolerance");
    if (tmpl.tolerance < 0.0) throw ConfigError("tolerance must be nonnegative");
  }
  if (const json* v = find_key(config, "cash_financed")) {
    tmpl.cash_financed = as_bool(*v, "cash_financed");
  }
  const std::vector<double> k_grid =
      as_double_array(require_key(config, "k_grid", "config"), "k_grid");
  resolved["k_grid"] = k_grid;
  resolved["gamma_grid"] = tmpl.gamma_grid;
  resolved["dmax_grid"] = tmpl.dmax_grid;
  resolved["tolerance"] = tmpl.tolerance;
  resolved["cash_financed"] = tmpl.cash_financed;

  const std::vector<DominationReport> reports =
      certify_domination(k_grid, dist, sim, tmpl);

  std::ofstream csv = open_csv(
      dir / "certify.csv", resolved,
      "k,markowitz_return,markowitz_drawdown,gamma,d_max,modulated_return,"
      "modulated_drawdown,return_gap,gap_std_error,strict",
      outcome);
  json rows = json::array();
  for (const DominationReport& r : reports) {
    const auto& st = std::get<ModulatedStrategy>(r.best.params);
    csv << fmt17(r.k_gain) << ',' << fmt17(r.markowitz.mean_return) << ','
        << fmt17(r.markowitz.mean_max_drawdown) << ',' << fmt17(st.gamma) << ','
        << fmt17(st.d_max) << ',' << fmt17(r.best.estimate.mean_return) << ','
        << fmt17(r.best.estimate.mean_max_drawdown) << ',' << fmt17(r.return_gap) << ','
        << fmt17(r.gap_std_error) << ',' << (r.strict ? 1 : 0) << '\n';
    rows.push_back({{"k", r.k_gain},
                    {"markowitz", estimate_json(r.markowitz)},
                    {"target_drawdown", r.target_drawdown},
                    {"best", modulated_point_json(r.best)},
                    {"return_gap", r.return_gap},
                    {"gap_std_error", r.gap_std_error},
                    {"strict", r.strict}});
  }
  write_json_doc(dir / "certify.json", json{{"config", resolved}, {"reports", rows}},
                 outcome);
}

void do_verify_n2(const json& config, const fs::path& dir, RunOutcome& outcome) {
  check_keys(config, {"mode", "k_points", "p_points", "k_grid", "p_grid"}, "config");
  json resolved{{"mode", "verify_n2"}};

  std::vector<double> k_grid;
  if (const json* v = find_key(config, "k_grid")) {
    k_grid = as_double_array(*v, "k_grid");
  } else {
    int n = 50;
    if (const json* v2 = find_key(config, "k_points")) n = as_int(*v2, "k_points", 1);
    for (int i = 1; i <= n; ++i) k_grid.push_back(double(i) / double(n + 1));
  }
  std::vector<double> p_grid;
  if (const json* v = find_key(config, "p_grid")) {
    p_grid = as_double_array(*v, "p_grid");
  } else {
    int n = 50;
    if (const json* v2 = find_key(config, "p_points")) n = as_int(*v2, "p_points", 1);
    for (int j = 1; j <= n; ++j) p_grid.push_back(0.5 + 0.5 * double(j) / double(n + 1));
  }
  if (k_grid.empty() || p_grid.empty()) throw ConfigError("verification grids are empty");
  for (double k : k_grid) {
    if (!(k > 0.0 && k < 1.0)) throw ConfigError("k_grid entries must lie in (0, 1)");
  }
  for (double p : p_grid) {
    if (!(p > 0.5 && p < 1.0)) throw ConfigError("p_grid entries must lie in (0.5, 1)");
  }
  resolved["k_grid"] = k_grid;
  resolved["p_grid"] = p_grid;

  constexpr double kEnumTol = 1e-10;   // closed form vs enumeration
  constexpr double kAlgebraTol = 1e-12;  // factored forms vs direct differences
  const SimulationConfig sim{1.0, 2};

  double dev_mark_r = 0.0, dev_mark_d = 0.0, dev_mod_r = 0.0, dev_mod_d = 0.0;
  double dev_gap = 0.0, dev_match = 0.0;
  double min_gap = 1e300, min_dm = 1e300, max_dm = -1e300;

  const auto fail = [](const char* what, double k, double p, double dev, double tol) {
    throw VerificationError(std::string(what) + " at k=" + fmt17(k) + ", p=" + fmt17(p) +
                            ": deviation " + fmt17(dev) + " exceeds " + fmt17(tol));
  };

  for (double p : p_grid) {
    const ReturnDistribution coin = make_coin({1.0, -1.0, p});
    for (double k : k_grid) {
      const RiskReturnPair cf_m = n2_markowitz_closed_form(k, p);
      const RiskReturnEstimate en_m =
          exact_estimate(Strategy{MarkowitzStrategy{k, false}}, coin, sim);
      const double dr = std::abs(cf_m.mean_return - en_m.mean_return);
      const double dd = std::abs(cf_m.mean_max_drawdown - en_m.mean_max_drawdown);
      dev_mark_r = std::max(dev_mark_r, dr);
      dev_mark_d = std::max(dev_mark_d, dd);
      if (dr > kEnumTol) fail("fixed-fraction mean return identity", k, p, dr, kEnumTol);
      if (dd > kEnumTol) fail("fixed-fraction mean drawdown identity", k, p, dd, kEnumTol);

      const double dm = matching_dmax(k, p);
      min_dm = std::min(min_dm, dm);
      max_dm = std::max(max_dm, dm);
      if (!(dm > 0.0 && dm < 1.0)) fail("matching cap range", k, p, dm, 1.0);

      const RiskReturnPair cf_g = n2_modulated_closed_form(1.0, dm, p);
      const RiskReturnEstimate en_g =
          exact_estimate(Strategy{ModulatedStrategy{1.0, dm, false}}, coin, sim);
      const double gr = std::abs(cf_g.mean_return - en_g.mean_return);
      const double gd = std::abs(cf_g.mean_max_drawdown - en_g.mean_max_drawdown);
      dev_mod_r = std::max(dev_mod_r, gr);
      dev_mod_d = std::max(dev_mod_d, gd);
      if (gr > kEnumTol) fail("modulated mean return identity", k, p, gr, kEnumTol);
      if (gd > kEnumTol) fail("modulated mean drawdown identity", k, p, gd, kEnumTol);

      // matched risk, factored gap, strict positivity
      const double dmatch = std::abs(cf_g.mean_max_drawdown - cf_m.mean_max_drawdown);
      dev_match = std::max(dev_match, dmatch);
      if (dmatch > kAlgebraTol) fail("drawdown matching identity", k, p, dmatch, kAlgebraTol);
      const double gap_direct = cf_g.mean_return - cf_m.mean_return;
      const double gap_factored = n2_domination_gap(k, p);
      const double dgap = std::abs(gap_direct - gap_factored);
      dev_gap = std::max(dev_gap, dgap);
      if (dgap > kAlgebraTol) fail("gap factorization identity", k, p, dgap, kAlgebraTol);
      min_gap = std::min(min_gap, gap_factored);
      if (!(gap_factored > 0.0)) fail("gap positivity", k, p, gap_factored, 0.0);
    }
  }

  const json report = {
      {"config", resolved},
      {"points", k_grid.size() * p_grid.size()},
      {"checks",
       {{"max_dev_markowitz_return", dev_mark_r},
        {"max_dev_markowitz_drawdown", dev_mark_d},
        {"max_dev_modulated_return", dev_mod_r},
        {"max_dev_modulated_drawdown", dev_mod_d},
        {"max_dev_drawdown_match", dev_match},
        {"max_dev_gap_factorization", dev_gap},
        {"min_gap", min_gap},
        {"min_matching_dmax", min_dm},
        {"max_matching_dmax", max_dm}}},
      {"passed", true}};
  write_json_doc(dir / "verify_n2.json", report, outcome);
}

}  // namespace

RunOutcome run_experiment(const json& config, const RunOptions& opts) {
  RunOutcome outcome;
  try {
    if (!config.is_object()) throw ConfigError("config root must be a JSON object");
    const std::string mode = as_string(require_key(config, "mode", "config"), "mode");
    const fs::path dir = prepare_dir(opts.out_dir);
    if (mode == "simulate") {
      do_simulate(config, opts, dir, outcome);
    } else if (mode == "sweep_markowitz") {
      do_sweep_markowitz(config, opts, dir, outcome);
    } else if (mode == "frontier") {
      do_frontier(config, opts, dir, outcome);
    } else if (mode == "certify") {
      do_certify(config, opts, dir, outcome);
    } else if (mode == "verify_n2") {
      do_verify_n2(config, dir, outcome);
    } else {
      throw ConfigError("unknown mode \"" + mode + "\"");
    }
  } catch (const ConfigError& e) {
    outcome = {2, "config", e.what(), outcome.files_written};
  } catch (const EnumerationLimitError& e) {
    outcome = {2, "config", e.what(), outcome.files_written};
  } catch (const VerificationError& e) {
    outcome = {3, "verification", e.what(), outcome.files_written};
  } catch (const json::exception& e) {
    outcome = {2, "config", e.what(), outcome.files_written};
  } catch (const std::exception& e) {
    outcome = {4, "runtime", e.what(), outcome.files_written};
  }
  return outcome;
}

RunOutcome run_experiment_file(const std::string& config_path, const RunOptions& opts) {
  json config;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file " + config_path);
    config = json::parse(in);
  } catch (const ConfigError& e) {
    return {2, "config", e.what(), {}};
  } catch (const json::parse_error& e) {
    return {2, "config", std::string("config parse: ") + e.what(), {}};
  }
  return run_experiment(config, opts);
}

std::string error_json(const RunOutcome& outcome) {
  const json doc = {
      {"error", {{"kind", outcome.error_kind}, {"message", outcome.message}}}};
  return doc.dump();
}

}  // namespace ddlab
