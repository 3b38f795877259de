#pragma once

#include <span>
#include <vector>

#include "ddlab/strategy.hpp"

namespace ddlab {

struct SimulationConfig {
  double v0 = 1.0;   // > 0
  int n_stages = 1;  // >= 1
};

void validate(const SimulationConfig& cfg);  // throws ConfigError

// One path's summary over stages 0..N.
struct PathStats {
  double final_value = 0.0;
  double overall_return = 0.0;    // V(N)/V(0) - 1
  double max_pct_drawdown = 0.0;  // d*, in [0, 1]
  double max_abs_drawdown = 0.0;  // max over k of (running peak - value)
  double log_growth = 0.0;        // log(V(N)/V(0)); -inf when V(N) == 0
};

// One row per stage. investment/x are the action taken at that stage and the
// return it realized; both are zero on the terminal row (no action at N).
struct TrajectoryRow {
  int k = 0;
  double v = 0.0;
  double v_max = 0.0;
  double d = 0.0;
  double investment = 0.0;
  double x = 0.0;
};

// Advance one stage: v' = v + investment * x. Throws BankruptcyError if the
// update drives the value negative past fp noise; exact zero survives and is
// absorbing (d = 1 from then on under proportional rules).
AccountState step(const AccountState& a, double investment_amount, double x);

// Runs the betting rule over the given per-stage returns. returns.size()
// must equal cfg.n_stages. Optionally records the full trajectory.
PathStats run_path(const Strategy& s, const SimulationConfig& cfg,
                   std::span<const double> returns,
                   std::vector<TrajectoryRow>* trajectory = nullptr);

// Drawdown statistics of an arbitrary nonnegative value series whose first
// element is positive.
double max_percentage_drawdown(std::span<const double> values);
double max_absolute_drawdown(std::span<const double> values);

}  // namespace ddlab
