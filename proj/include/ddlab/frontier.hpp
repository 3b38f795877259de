#pragma once

#include <optional>
#include <vector>

#include "ddlab/expectation.hpp"

namespace ddlab {

// Cap used when a modulated rule must replicate a fixed-fraction baseline:
// close enough to 1 that the two agree to ~1e-12 per path, while keeping the
// cap inside (0, 1).
inline constexpr double kReplicationDmax = 1.0 - 1e-12;

struct FrontierQuery {
  double target_drawdown = 0.1;  // constraint on the mean max drawdown
  double tolerance = 0.0025;     // |mean d* - target| band half-width
  std::vector<double> gamma_grid;
  std::vector<double> dmax_grid;
  bool cash_financed = true;  // skip pairs with |gamma| d_max > 1
  EstimatorOptions backend;
};

struct FrontierPoint {
  Strategy params;
  RiskReturnEstimate estimate;
  bool feasible = false;
};

// Default search grids: 99 caps over {0.01, ..., 0.99} and 101 gains spanning
// [0, min(1/|x_min|, 1/min(dmax_grid))], the gains usable with at least one
// cap under cash financing.
std::vector<double> default_dmax_grid(int points = 99);
std::vector<double> default_gamma_grid(const ReturnDistribution& dist,
                                       const std::vector<double>& dmax_grid,
                                       int points = 101);

// Fixed-fraction risk-return curve over a gain grid. Every K must be
// admissible for `dist`.
std::vector<FrontierPoint> markowitz_curve(const std::vector<double>& k_grid,
                                           const ReturnDistribution& dist,
                                           const SimulationConfig& cfg,
                                           const EstimatorOptions& backend);

// Every admissible (gamma, d_max) grid pair evaluated with the query backend,
// in grid order (gamma major). Feasibility flags are left false; see
// select_for_target. Gains outside the survival interval are config errors;
// cash-infeasible pairs are skipped.
std::vector<FrontierPoint> evaluate_modulated_grid(const FrontierQuery& q,
                                                   const ReturnDistribution& dist,
                                                   const SimulationConfig& cfg);

struct FrontierSelection {
  double target = 0.0;
  std::optional<FrontierPoint> best;     // empty => no point inside the band
  std::optional<FrontierPoint> nearest;  // closest mean drawdown to the target
};

// Highest-mean-return point whose mean max drawdown lies within tolerance of
// the target. Ties break toward smaller d_max, then smaller |gamma|, then
// first in grid order.
FrontierSelection select_for_target(const std::vector<FrontierPoint>& evaluated,
                                    double target, double tolerance);

struct FrontierResult {
  std::vector<FrontierPoint> evaluated;  // feasibility flagged for the query target
  std::optional<FrontierPoint> best;
  std::optional<FrontierPoint> nearest;
};

FrontierResult maximize_modulated_return(const FrontierQuery& q,
                                         const ReturnDistribution& dist,
                                         const SimulationConfig& cfg);

struct DominationReport {
  double k_gain = 0.0;
  RiskReturnEstimate markowitz;
  double target_drawdown = 0.0;  // the baseline's mean max drawdown
  FrontierPoint best;            // winning modulated point
  double return_gap = 0.0;       // modulated minus baseline mean return
  double gap_std_error = 0.0;    // paired std error; 0 for the exact backend
  bool strict = false;           // gap > 4 paired std errors (exact: gap > 1e-10)
};

// For each baseline gain, finds the best modulated rule whose mean max
// drawdown matches the baseline's and reports the return gap. The fallback
// pair (gamma = K, d_max = kReplicationDmax) is injected into the search, so
// a feasible point always exists. All baselines share one grid evaluation and
// one set of sampled paths (common random numbers).
std::vector<DominationReport> certify_domination(const std::vector<double>& k_grid,
                                                 const ReturnDistribution& dist,
                                                 const SimulationConfig& cfg,
                                                 const FrontierQuery& query_template);

DominationReport certify_domination(double k_gain, const ReturnDistribution& dist,
                                    const SimulationConfig& cfg,
                                    const FrontierQuery& query_template);

}  // namespace ddlab
