#include "ddlab/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"
#include "ddlab/summation.hpp"

namespace ddlab {

const char* to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::closed_form: return "closed_form";
    case EstimatorMethod::enumeration: return "enumeration";
    case EstimatorMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

double markowitz_expected_return(double k_gain, double mean_stage_return, int n_stages) {
  if (n_stages < 1) {
    throw ConfigError("horizon must be at least one stage");
  }
  return std::pow(1.0 + k_gain * mean_stage_return, n_stages) - 1.0;
}

double markowitz_worst_case_drawdown(double k_gain, const ReturnDistribution& dist,
                                     int n_stages) {
  if (n_stages < 1) {
    throw ConfigError("horizon must be at least one stage");
  }
  const double amax = std::max(-dist.x_min(), dist.x_max());
  const double base = 1.0 - std::abs(k_gain) * amax;
  if (base <= 0.0) return 1.0;
  return 1.0 - std::pow(base, n_stages);
}

namespace {

constexpr std::uint64_t kMcBlock = 4096;

struct BlockSums {
  double r = 0.0, r2 = 0.0, d = 0.0, d2 = 0.0;
};

// fill(path_index, buffer) materializes a path's returns into buffer.
template <typename Fill>
void mc_moments(const Strategy& s, const SimulationConfig& cfg, std::uint64_t paths,
                int threads, Fill&& fill, RiskReturnEstimate* out) {
  validate(cfg);
  if (paths < 1) throw ConfigError("monte carlo needs at least one path");
  const std::uint64_t n_blocks = (paths + kMcBlock - 1) / kMcBlock;
  std::vector<BlockSums> blocks(n_blocks);

  parallel_for(n_blocks, threads, [&](std::uint64_t b) {
    std::vector<double> buf(static_cast<std::size_t>(cfg.n_stages));
    CompensatedSum sr, sr2, sd, sd2;
    const std::uint64_t lo = b * kMcBlock;
    const std::uint64_t hi = std::min(paths, lo + kMcBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      fill(i, buf);
      const PathStats st = run_path(s, cfg, buf);
      sr.add(st.overall_return);
      sr2.add(st.overall_return * st.overall_return);
      sd.add(st.max_pct_drawdown);
      sd2.add(st.max_pct_drawdown * st.max_pct_drawdown);
    }
    blocks[b] = {sr.value(), sr2.value(), sd.value(), sd2.value()};
  });

  CompensatedSum r, r2, d, d2;
  for (const BlockSums& bl : blocks) {
    r.add(bl.r);
    r2.add(bl.r2);
    d.add(bl.d);
    d2.add(bl.d2);
  }
  const double n = static_cast<double>(paths);
  out->mean_return = r.value() / n;
  out->mean_max_drawdown = d.value() / n;
  auto std_error = [n](double sum, double sum2, double mean) {
    if (n < 2.0) return 0.0;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };
  out->std_error_return = std_error(r.value(), r2.value(), out->mean_return);
  out->std_error_drawdown = std_error(d.value(), d2.value(), out->mean_max_drawdown);
  out->method = EstimatorMethod::monte_carlo;
  out->paths = paths;
}

}  // namespace

RiskReturnEstimate exact_estimate(const Strategy& s, const ReturnDistribution& dist,
                                  const SimulationConfig& cfg, std::uint64_t cap) {
  validate(cfg);
  PathEnumerator paths(dist, cfg.n_stages, cap);
  CompensatedSum mass, r, d;
  std::span<const double> xs;
  double prob = 0.0;
  while (paths.next(xs, prob)) {
    const PathStats st = run_path(s, cfg, xs);
    mass.add(prob);
    r.add(prob * st.overall_return);
    d.add(prob * st.max_pct_drawdown);
  }
  if (std::abs(mass.value() - 1.0) > 1e-10) {
    throw InvariantError("enumerated probability mass is " + std::to_string(mass.value()) +
                         ", expected 1 within 1e-10");
  }
  RiskReturnEstimate est;
  est.mean_return = r.value();
  est.mean_max_drawdown = d.value();
  est.method = EstimatorMethod::enumeration;
  return est;
}

RiskReturnEstimate monte_carlo_estimate(const Strategy& s, const ReturnDistribution& dist,
                                        const SimulationConfig& cfg, std::uint64_t paths,
                                        std::uint64_t seed, int threads) {
  RiskReturnEstimate est;
  mc_moments(
      s, cfg, paths, threads,
      [&](std::uint64_t i, std::vector<double>& buf) {
        SubstreamRng stream(seed, i);
        for (double& x : buf) x = dist.value(dist.draw(stream));
      },
      &est);
  est.seed = seed;
  return est;
}

SampledPathTable::SampledPathTable(const ReturnDistribution& dist, int n_stages,
                                   std::uint64_t paths, std::uint64_t seed, int threads)
    : n_(n_stages), paths_(paths), seed_(seed) {
  if (n_stages < 1) throw ConfigError("path table needs at least one stage");
  if (paths < 1) throw ConfigError("path table needs at least one path");
  if (dist.size() > 256) {
    throw ConfigError("path table supports at most 256 outcomes");
  }
  data_.resize(paths * static_cast<std::uint64_t>(n_stages));
  const std::uint64_t n_blocks = (paths + kMcBlock - 1) / kMcBlock;
  parallel_for(n_blocks, threads, [&](std::uint64_t b) {
    const std::uint64_t lo = b * kMcBlock;
    const std::uint64_t hi = std::min(paths, lo + kMcBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      SubstreamRng stream(seed, i);
      std::uint8_t* row = data_.data() + i * static_cast<std::uint64_t>(n_);
      for (int k = 0; k < n_; ++k) row[k] = static_cast<std::uint8_t>(dist.draw(stream));
    }
  });
}

RiskReturnEstimate monte_carlo_estimate(const Strategy& s, const ReturnDistribution& dist,
                                        double v0, const SampledPathTable& table,
                                        int threads) {
  SimulationConfig cfg{v0, table.n_stages()};
  RiskReturnEstimate est;
  mc_moments(
      s, cfg, table.paths(), threads,
      [&](std::uint64_t i, std::vector<double>& buf) {
        const std::uint8_t* row = table.row(i);
        for (int k = 0; k < table.n_stages(); ++k)
          buf[static_cast<std::size_t>(k)] = dist.value(row[k]);
      },
      &est);
  est.seed = table.seed();
  return est;
}

RiskReturnEstimate estimate_risk_return(const Strategy& s, const ReturnDistribution& dist,
                                        const SimulationConfig& cfg,
                                        const EstimatorOptions& opt) {
  switch (opt.method) {
    case EstimatorMethod::enumeration:
      return exact_estimate(s, dist, cfg, opt.enumeration_cap);
    case EstimatorMethod::monte_carlo:
      return monte_carlo_estimate(s, dist, cfg, opt.paths, opt.seed, opt.threads);
    case EstimatorMethod::closed_form:
      throw ConfigError("closed_form is not a path-simulation backend");
  }
  throw ConfigError("unknown estimator method");
}

namespace {

void check_n2_args(double p_win) {
  if (!(p_win > 0.5 && p_win < 1.0)) {
    throw ConfigError("two-stage closed forms need 1/2 < p < 1, got " +
                      std::to_string(p_win));
  }
}

}  // namespace

RiskReturnPair n2_markowitz_closed_form(double k_gain, double p_win) {
  check_n2_args(p_win);
  if (!(k_gain > 0.0 && k_gain <= 1.0)) {
    throw ConfigError("two-stage fixed-fraction closed form needs 0 < K <= 1");
  }
  const double mu = 2.0 * p_win - 1.0;
  RiskReturnPair out;
  out.mean_return = (1.0 + k_gain * mu) * (1.0 + k_gain * mu) - 1.0;
  out.mean_max_drawdown = k_gain * (1.0 - p_win) * (2.0 - k_gain + k_gain * p_win);
  return out;
}

RiskReturnPair n2_modulated_closed_form(double gamma, double d_max, double p_win) {
  check_n2_args(p_win);
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("two-stage modulated closed form needs 0 <= gamma <= 1");
  }
  if (!(d_max > 0.0 && d_max < 1.0)) {
    throw ConfigError("two-stage modulated closed form needs d_max in (0, 1)");
  }
  const double g = gamma * d_max;
  RiskReturnPair out;
  out.mean_return = g * (2.0 * p_win - 1.0) * (g * p_win + gamma * p_win - gamma + 2.0);
  out.mean_max_drawdown = g * (1.0 - p_win) * (2.0 - gamma + gamma * p_win);
  return out;
}

double matching_dmax(double k_gain, double p_win) {
  check_n2_args(p_win);
  if (!(k_gain > 0.0 && k_gain <= 1.0)) {
    throw ConfigError("matching cap needs 0 < K <= 1");
  }
  return k_gain * (2.0 - k_gain + k_gain * p_win) / (1.0 + p_win);
}

double n2_domination_gap(double k_gain, double p_win) {
  check_n2_args(p_win);
  if (!(k_gain > 0.0 && k_gain <= 1.0)) {
    throw ConfigError("domination gap needs 0 < K <= 1");
  }
  const double k = k_gain, p = p_win;
  return k * k * (1.0 - k) * (1.0 - p) * p * (2.0 * p - 1.0) *
         (3.0 + p + k * p - k) / ((1.0 + p) * (1.0 + p));
}

double expected_log_growth(const Strategy& s, const ReturnDistribution& dist,
                           const SimulationConfig& cfg, const EstimatorOptions& opt) {
  validate(cfg);
  auto growth_of = [&](const PathStats& st) {
    if (!(st.final_value > 0.0)) {
      throw InvariantError(
          "expected log growth undefined: a path ends at zero account value");
    }
    return st.log_growth;
  };
  if (opt.method == EstimatorMethod::enumeration) {
    PathEnumerator paths(dist, cfg.n_stages, opt.enumeration_cap);
    CompensatedSum acc;
    std::span<const double> xs;
    double prob = 0.0;
    while (paths.next(xs, prob)) {
      acc.add(prob * growth_of(run_path(s, cfg, xs)));
    }
    return acc.value();
  }
  if (opt.method == EstimatorMethod::monte_carlo) {
    if (opt.paths < 1) throw ConfigError("monte carlo needs at least one path");
    const std::uint64_t n_blocks = (opt.paths + kMcBlock - 1) / kMcBlock;
    std::vector<double> blocks(n_blocks, 0.0);
    parallel_for(n_blocks, opt.threads, [&](std::uint64_t b) {
      std::vector<double> buf(static_cast<std::size_t>(cfg.n_stages));
      CompensatedSum acc;
      const std::uint64_t lo = b * kMcBlock;
      const std::uint64_t hi = std::min(opt.paths, lo + kMcBlock);
      for (std::uint64_t i = lo; i < hi; ++i) {
        SubstreamRng stream(opt.seed, i);
        for (double& x : buf) x = dist.value(dist.draw(stream));
        acc.add(growth_of(run_path(s, cfg, buf)));
      }
      blocks[b] = acc.value();
    });
    CompensatedSum total;
    for (double b : blocks) total.add(b);
    return total.value() / static_cast<double>(opt.paths);
  }
  throw ConfigError("expected log growth needs enumeration or monte_carlo backend");
}

PairedGapEstimate paired_return_gap(const Strategy& a, const Strategy& b,
                                    const ReturnDistribution& dist,
                                    const SimulationConfig& cfg, std::uint64_t paths,
                                    std::uint64_t seed, int threads) {
  validate(cfg);
  if (paths < 1) throw ConfigError("paired comparison needs at least one path");
  struct Sums {
    double g = 0.0, g2 = 0.0, ra = 0.0, rb = 0.0;
  };
  const std::uint64_t n_blocks = (paths + kMcBlock - 1) / kMcBlock;
  std::vector<Sums> blocks(n_blocks);
  parallel_for(n_blocks, threads, [&](std::uint64_t blk) {
    std::vector<double> buf(static_cast<std::size_t>(cfg.n_stages));
    CompensatedSum g, g2, ra, rb;
    const std::uint64_t lo = blk * kMcBlock;
    const std::uint64_t hi = std::min(paths, lo + kMcBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      SubstreamRng stream(seed, i);
      for (double& x : buf) x = dist.value(dist.draw(stream));
      const double r_a = run_path(a, cfg, buf).overall_return;
      const double r_b = run_path(b, cfg, buf).overall_return;
      const double diff = r_a - r_b;
      g.add(diff);
      g2.add(diff * diff);
      ra.add(r_a);
      rb.add(r_b);
    }
    blocks[blk] = {g.value(), g2.value(), ra.value(), rb.value()};
  });
  CompensatedSum g, g2, ra, rb;
  for (const Sums& s : blocks) {
    g.add(s.g);
    g2.add(s.g2);
    ra.add(s.ra);
    rb.add(s.rb);
  }
  const double n = static_cast<double>(paths);
  PairedGapEstimate out;
  out.mean_gap = g.value() / n;
  out.mean_return_a = ra.value() / n;
  out.mean_return_b = rb.value() / n;
  if (n >= 2.0) {
    const double var = std::max(0.0, (g2.value() - n * out.mean_gap * out.mean_gap) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

}  // namespace ddlab
