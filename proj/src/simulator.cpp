#include "ddlab/simulator.hpp"

#include <cmath>
#include <string>

#include "ddlab/errors.hpp"

namespace ddlab {

void validate(const SimulationConfig& cfg) {
  if (!(cfg.v0 > 0.0) || !std::isfinite(cfg.v0)) {
    throw ConfigError("initial value must be positive and finite, got " +
                      std::to_string(cfg.v0));
  }
  if (cfg.n_stages < 1) {
    throw ConfigError("simulation needs at least one stage, got " +
                      std::to_string(cfg.n_stages));
  }
}

AccountState step(const AccountState& a, double investment_amount, double x) {
  double v = a.v + investment_amount * x;
  if (v < 0.0) {
    if (v < -kDrawdownTol * a.v_max) {
      throw BankruptcyError("stage update drove account value to " + std::to_string(v) +
                            ": investment violated the survival bounds");
    }
    v = 0.0;
  }
  const double v_max = v > a.v_max ? v : a.v_max;
  return {v, v_max, (v_max - v) / v_max};
}

namespace {

template <typename Rule>
PathStats run_path_impl(const Rule& rule, const SimulationConfig& cfg,
                        std::span<const double> returns,
                        std::vector<TrajectoryRow>* trajectory) {
  AccountState a = AccountState::fresh(cfg.v0);
  double d_star = 0.0;
  double abs_star = 0.0;
  for (std::size_t k = 0; k < returns.size(); ++k) {
    double amount;
    if constexpr (std::is_same_v<Rule, MarkowitzStrategy>) {
      amount = markowitz_investment(rule, a);
    } else {
      amount = modulated_investment(rule, a);
    }
    const double x = returns[k];
    if (trajectory) {
      trajectory->push_back({static_cast<int>(k), a.v, a.v_max, a.d, amount, x});
    }
    a = step(a, amount, x);
    if (a.d > d_star) d_star = a.d;
    const double gap = a.v_max - a.v;
    if (gap > abs_star) abs_star = gap;
  }
  if (trajectory) {
    trajectory->push_back(
        {static_cast<int>(returns.size()), a.v, a.v_max, a.d, 0.0, 0.0});
  }
  PathStats st;
  st.final_value = a.v;
  st.overall_return = a.v / cfg.v0 - 1.0;
  st.max_pct_drawdown = d_star;
  st.max_abs_drawdown = abs_star;
  st.log_growth = std::log(a.v / cfg.v0);
  return st;
}

}  // namespace

PathStats run_path(const Strategy& s, const SimulationConfig& cfg,
                   std::span<const double> returns,
                   std::vector<TrajectoryRow>* trajectory) {
  validate(cfg);
  if (returns.size() != static_cast<std::size_t>(cfg.n_stages)) {
    throw ConfigError("path has " + std::to_string(returns.size()) + " returns but " +
                      std::to_string(cfg.n_stages) + " stages were configured");
  }
  return std::visit(
      [&](const auto& rule) { return run_path_impl(rule, cfg, returns, trajectory); }, s);
}

namespace {

void check_series(std::span<const double> values) {
  if (values.empty()) {
    throw ConfigError("drawdown statistics need a nonempty value series");
  }
  if (!(values.front() > 0.0)) {
    throw ConfigError("value series must start positive");
  }
  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw ConfigError("value series must be nonnegative and finite");
    }
  }
}

}  // namespace

double max_percentage_drawdown(std::span<const double> values) {
  check_series(values);
  double peak = values.front();
  double worst = 0.0;
  for (double v : values) {
    if (v > peak) peak = v;
    const double d = (peak - v) / peak;
    if (d > worst) worst = d;
  }
  return worst;
}

double max_absolute_drawdown(std::span<const double> values) {
  check_series(values);
  double peak = values.front();
  double worst = 0.0;
  for (double v : values) {
    if (v > peak) peak = v;
    const double gap = peak - v;
    if (gap > worst) worst = gap;
  }
  return worst;
}

}  // namespace ddlab
