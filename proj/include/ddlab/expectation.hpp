#pragma once

#include <cstdint>

#include "ddlab/simulator.hpp"

namespace ddlab {

enum class EstimatorMethod { closed_form, enumeration, monte_carlo };

const char* to_string(EstimatorMethod m);

struct EstimatorOptions {
  EstimatorMethod method = EstimatorMethod::enumeration;
  std::uint64_t paths = 100'000;  // monte_carlo only
  std::uint64_t seed = 0;         // monte_carlo only
  int threads = 1;                // 0 = hardware concurrency; never affects results
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct RiskReturnEstimate {
  double mean_return = 0.0;
  double mean_max_drawdown = 0.0;
  double std_error_return = 0.0;    // sample sd / sqrt(paths); 0 for exact methods
  double std_error_drawdown = 0.0;  // likewise
  EstimatorMethod method = EstimatorMethod::enumeration;
  std::uint64_t paths = 0;  // sampled paths, 0 for exact methods
  std::uint64_t seed = 0;
};

// (1 + K mu)^N - 1.
double markowitz_expected_return(double k_gain, double mean_stage_return, int n_stages);

// All-adverse-path percentage drawdown of the fixed-fraction rule:
// 1 - (1 - |K| max(|x_min|, x_max))^N, clamped into [0, 1].
double markowitz_worst_case_drawdown(double k_gain, const ReturnDistribution& dist,
                                     int n_stages);

// Probability-weighted mean return / mean max percentage drawdown over every
// path of the distribution (|outcomes|^N paths, capped).
RiskReturnEstimate exact_estimate(const Strategy& s, const ReturnDistribution& dist,
                                  const SimulationConfig& cfg,
                                  std::uint64_t cap = kDefaultEnumerationCap);

// Monte-Carlo estimate over per-path substreams of `seed`. Results are
// bit-identical for any thread count: paths are reduced in fixed-size blocks
// that are combined in index order.
RiskReturnEstimate monte_carlo_estimate(const Strategy& s, const ReturnDistribution& dist,
                                        const SimulationConfig& cfg, std::uint64_t paths,
                                        std::uint64_t seed, int threads = 1);

// Pre-sampled outcome-index table: row i holds the outcome indices substream
// (seed, i) produces, so parameter sweeps can replay identical randomness
// (common random numbers) without re-drawing. Estimates computed through a
// table are bit-identical to the direct monte_carlo_estimate.
class SampledPathTable {
 public:
  SampledPathTable(const ReturnDistribution& dist, int n_stages, std::uint64_t paths,
                   std::uint64_t seed, int threads = 1);

  std::uint64_t paths() const { return paths_; }
  int n_stages() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const std::uint8_t* row(std::uint64_t i) const {
    return data_.data() + i * static_cast<std::uint64_t>(n_);
  }

 private:
  int n_;
  std::uint64_t paths_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> data_;
};

RiskReturnEstimate monte_carlo_estimate(const Strategy& s, const ReturnDistribution& dist,
                                        double v0, const SampledPathTable& table,
                                        int threads = 1);

// Dispatch on opt.method; closed_form is not a path backend and is rejected.
RiskReturnEstimate estimate_risk_return(const Strategy& s, const ReturnDistribution& dist,
                                        const SimulationConfig& cfg,
                                        const EstimatorOptions& opt);

struct RiskReturnPair {
  double mean_return = 0.0;
  double mean_max_drawdown = 0.0;
};

// Two-stage even-money-coin closed forms (win/loss = +-1, 1/2 < p < 1).
RiskReturnPair n2_markowitz_closed_form(double k_gain, double p_win);
RiskReturnPair n2_modulated_closed_form(double gamma, double d_max, double p_win);

// Cap that makes the gamma = 1 modulated rule match the fixed-fraction rule's
// two-stage expected max drawdown: K (2 - K + K p) / (1 + p), in (0, 1).
double matching_dmax(double k_gain, double p_win);

// Expected-return advantage of that matched modulated rule over the
// fixed-fraction rule, factored form; strictly positive for 0 < K < 1:
//   K^2 (1 - K)(1 - p) p (2p - 1)(3 + p + K p - K) / (1 + p)^2
double n2_domination_gap(double k_gain, double p_win);

// E[log(V(N)/V(0))]. Throws InvariantError when a terminal value of zero
// carries positive probability (enumeration) or is sampled (monte carlo).
double expected_log_growth(const Strategy& s, const ReturnDistribution& dist,
                           const SimulationConfig& cfg, const EstimatorOptions& opt);

// Paired comparison of two rules on identical sampled paths (common random
// numbers); mean_gap is the per-path mean of (return_a - return_b).
struct PairedGapEstimate {
  double mean_gap = 0.0;
  double std_error = 0.0;
  double mean_return_a = 0.0;
  double mean_return_b = 0.0;
};

PairedGapEstimate paired_return_gap(const Strategy& a, const Strategy& b,
                                    const ReturnDistribution& dist,
                                    const SimulationConfig& cfg, std::uint64_t paths,
                                    std::uint64_t seed, int threads = 1);

}  // namespace ddlab
