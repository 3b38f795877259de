#include "ddlab/frontier.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

namespace ddlab {

std::vector<double> default_dmax_grid(int points) {
  if (points < 1) throw ConfigError("cap grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        static_cast<double>(i + 1) / static_cast<double>(points + 1);
  }
  return grid;
}

std::vector<double> default_gamma_grid(const ReturnDistribution& dist,
                                       const std::vector<double>& dmax_grid, int points) {
  if (points < 2) throw ConfigError("gain grid needs at least two points");
  if (dmax_grid.empty()) throw ConfigError("gain grid derivation needs a cap grid");
  double dmax_min = dmax_grid.front();
  for (double d : dmax_grid) dmax_min = std::min(dmax_min, d);
  if (!(dmax_min > 0.0)) throw ConfigError("cap grid entries must be positive");
  const double hi = std::min(1.0 / -dist.x_min(), 1.0 / dmax_min);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        hi * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

namespace {

struct GridPair {
  double gamma = 0.0;
  double dmax = 0.0;
};

std::vector<GridPair> admissible_pairs(const FrontierQuery& q,
                                       const ReturnDistribution& dist) {
  if (q.gamma_grid.empty() || q.dmax_grid.empty()) {
    throw ConfigError("frontier query needs nonempty gain and cap grids");
  }
  for (double dm : q.dmax_grid) {
    if (!(dm > 0.0 && dm < 1.0)) {
      throw ConfigError("cap grid entry " + std::to_string(dm) + " outside (0, 1)");
    }
  }
  for (double g : q.gamma_grid) {
    const AdmissibilityReport rep = check_admissible(
        ModulatedStrategy{g, q.dmax_grid.front(), false}, dist);
    if (!rep.admissible) {
      throw ConfigError("gain grid entry " + std::to_string(g) +
                        " is not survival-admissible: " + rep.summary());
    }
  }
  std::vector<GridPair> pairs;
  pairs.reserve(q.gamma_grid.size() * q.dmax_grid.size());
  for (double g : q.gamma_grid) {
    for (double dm : q.dmax_grid) {
      if (q.cash_financed && std::abs(g) * dm > 1.0 + 1e-12) continue;
      pairs.push_back({g, dm});
    }
  }
  return pairs;
}

std::vector<FrontierPoint> evaluate_pairs(const std::vector<GridPair>& pairs,
                                          bool cash_financed,
                                          const ReturnDistribution& dist,
                                          const SimulationConfig& cfg,
                                          const EstimatorOptions& backend,
                                          const SampledPathTable* table) {
  validate(cfg);
  std::vector<FrontierPoint> points(pairs.size());
  parallel_for(pairs.size(), backend.threads, [&](std::uint64_t i) {
    const ModulatedStrategy strat{pairs[i].gamma, pairs[i].dmax, cash_financed};
    RiskReturnEstimate est;
    if (table != nullptr) {
      est = monte_carlo_estimate(Strategy{strat}, dist, cfg.v0, *table, 1);
    } else if (backend.method == EstimatorMethod::monte_carlo) {
      est = monte_carlo_estimate(Strategy{strat}, dist, cfg, backend.paths, backend.seed, 1);
    } else if (backend.method == EstimatorMethod::enumeration) {
      est = exact_estimate(Strategy{strat}, dist, cfg, backend.enumeration_cap);
    } else {
      throw ConfigError("frontier evaluation needs enumeration or monte_carlo backend");
    }
    points[i] = {Strategy{strat}, est, false};
  });
  return points;
}

std::optional<SampledPathTable> maybe_table(const FrontierQuery& q,
                                            const ReturnDistribution& dist,
                                            const SimulationConfig& cfg) {
  if (q.backend.method != EstimatorMethod::monte_carlo || dist.size() > 256) {
    return std::nullopt;
  }
  return SampledPathTable(dist, cfg.n_stages, q.backend.paths, q.backend.seed,
                          q.backend.threads);
}

const ModulatedStrategy& modulated_of(const FrontierPoint& p) {
  const auto* m = std::get_if<ModulatedStrategy>(&p.params);
  if (m == nullptr) {
    throw InvariantError("frontier selection expects modulated grid points");
  }
  return *m;
}

// Strictly-better-than for the constrained maximization: higher mean return,
// ties toward smaller cap, then smaller |gamma|.
bool better(const FrontierPoint& a, const FrontierPoint& b) {
  if (a.estimate.mean_return != b.estimate.mean_return) {
    return a.estimate.mean_return > b.estimate.mean_return;
  }
  const ModulatedStrategy& ma = modulated_of(a);
  const ModulatedStrategy& mb = modulated_of(b);
  if (ma.d_max != mb.d_max) return ma.d_max < mb.d_max;
  return std::abs(ma.gamma) < std::abs(mb.gamma);
}

}  // namespace

std::vector<FrontierPoint> markowitz_curve(const std::vector<double>& k_grid,
                                           const ReturnDistribution& dist,
                                           const SimulationConfig& cfg,
                                           const EstimatorOptions& backend) {
  validate(cfg);
  if (k_grid.empty()) throw ConfigError("gain grid must be nonempty");
  for (double k : k_grid) {
    const AdmissibilityReport rep =
        check_admissible(MarkowitzStrategy{k, false}, dist);
    if (!rep.admissible) {
      throw ConfigError("gain grid entry " + std::to_string(k) + ": " + rep.summary());
    }
  }
  std::optional<SampledPathTable> table;
  if (backend.method == EstimatorMethod::monte_carlo && dist.size() <= 256) {
    table.emplace(dist, cfg.n_stages, backend.paths, backend.seed, backend.threads);
  }
  std::vector<FrontierPoint> points(k_grid.size());
  parallel_for(k_grid.size(), backend.threads, [&](std::uint64_t i) {
    const MarkowitzStrategy strat{k_grid[i], false};
    RiskReturnEstimate est;
    if (table.has_value()) {
      est = monte_carlo_estimate(Strategy{strat}, dist, cfg.v0, *table, 1);
    } else if (backend.method == EstimatorMethod::monte_carlo) {
      est = monte_carlo_estimate(Strategy{strat}, dist, cfg, backend.paths, backend.seed, 1);
    } else if (backend.method == EstimatorMethod::enumeration) {
      est = exact_estimate(Strategy{strat}, dist, cfg, backend.enumeration_cap);
    } else {
      throw ConfigError("curve evaluation needs enumeration or monte_carlo backend");
    }
    points[i] = {Strategy{strat}, est, true};
  });
  return points;
}

std::vector<FrontierPoint> evaluate_modulated_grid(const FrontierQuery& q,
                                                   const ReturnDistribution& dist,
                                                   const SimulationConfig& cfg) {
  const std::vector<GridPair> pairs = admissible_pairs(q, dist);
  const std::optional<SampledPathTable> table = maybe_table(q, dist, cfg);
  return evaluate_pairs(pairs, q.cash_financed, dist, cfg, q.backend,
                        table.has_value() ? &*table : nullptr);
}

FrontierSelection select_for_target(const std::vector<FrontierPoint>& evaluated,
                                    double target, double tolerance) {
  if (tolerance < 0.0) throw ConfigError("tolerance must be nonnegative");
  FrontierSelection sel;
  sel.target = target;
  for (const FrontierPoint& p : evaluated) {
    const double miss = std::abs(p.estimate.mean_max_drawdown - target);
    if (!sel.nearest.has_value() ||
        miss < std::abs(sel.nearest->estimate.mean_max_drawdown - target)) {
      sel.nearest = p;
    }
    if (miss <= tolerance) {
      if (!sel.best.has_value() || better(p, *sel.best)) {
        sel.best = p;
        sel.best->feasible = true;
      }
    }
  }
  return sel;
}

FrontierResult maximize_modulated_return(const FrontierQuery& q,
                                         const ReturnDistribution& dist,
                                         const SimulationConfig& cfg) {
  FrontierResult out;
  out.evaluated = evaluate_modulated_grid(q, dist, cfg);
  for (FrontierPoint& p : out.evaluated) {
    p.feasible = std::abs(p.estimate.mean_max_drawdown - q.target_drawdown) <= q.tolerance;
  }
  FrontierSelection sel = select_for_target(out.evaluated, q.target_drawdown, q.tolerance);
  out.best = std::move(sel.best);
  out.nearest = std::move(sel.nearest);
  return out;
}

std::vector<DominationReport> certify_domination(const std::vector<double>& k_grid,
                                                 const ReturnDistribution& dist,
                                                 const SimulationConfig& cfg,
                                                 const FrontierQuery& query_template) {
  validate(cfg);
  if (k_grid.empty()) throw ConfigError("certification needs at least one baseline gain");
  for (double k : k_grid) {
    const AdmissibilityReport rep =
        check_admissible(MarkowitzStrategy{k, query_template.cash_financed}, dist);
    if (!rep.admissible) {
      throw ConfigError("baseline gain " + std::to_string(k) + ": " + rep.summary());
    }
  }

  const EstimatorOptions& backend = query_template.backend;
  const std::optional<SampledPathTable> table = maybe_table(query_template, dist, cfg);

  // one shared evaluation: the query grid plus each baseline's fallback pair
  std::vector<GridPair> pairs = admissible_pairs(query_template, dist);
  const std::size_t n_grid = pairs.size();
  for (double k : k_grid) pairs.push_back({k, kReplicationDmax});
  const std::vector<FrontierPoint> evaluated =
      evaluate_pairs(pairs, query_template.cash_financed, dist, cfg, backend,
                     table.has_value() ? &*table : nullptr);

  std::vector<DominationReport> reports;
  reports.reserve(k_grid.size());
  for (std::size_t j = 0; j < k_grid.size(); ++j) {
    const double k = k_grid[j];
    const Strategy baseline{MarkowitzStrategy{k, query_template.cash_financed}};
    DominationReport rep;
    rep.k_gain = k;
    if (table.has_value()) {
      rep.markowitz = monte_carlo_estimate(baseline, dist, cfg.v0, *table, backend.threads);
    } else if (backend.method == EstimatorMethod::monte_carlo) {
      rep.markowitz = monte_carlo_estimate(baseline, dist, cfg, backend.paths,
                                           backend.seed, backend.threads);
    } else {
      rep.markowitz = exact_estimate(baseline, dist, cfg, backend.enumeration_cap);
    }
    rep.target_drawdown = rep.markowitz.mean_max_drawdown;

    // candidates: the shared grid plus this baseline's own fallback
    std::vector<FrontierPoint> candidates(evaluated.begin(),
                                          evaluated.begin() + static_cast<std::ptrdiff_t>(n_grid));
    candidates.push_back(evaluated[n_grid + j]);
    FrontierSelection sel =
        select_for_target(candidates, rep.target_drawdown, query_template.tolerance);
    if (!sel.best.has_value()) {
      throw InvariantError("certification found no feasible point despite the fallback");
    }
    rep.best = *sel.best;

    if (backend.method == EstimatorMethod::monte_carlo) {
      const PairedGapEstimate gap =
          paired_return_gap(rep.best.params, baseline, dist, cfg, backend.paths,
                            backend.seed, backend.threads);
      rep.return_gap = gap.mean_gap;
      rep.gap_std_error = gap.std_error;
      rep.strict = gap.std_error > 0.0 && gap.mean_gap > 4.0 * gap.std_error;
    } else {
      rep.return_gap = rep.best.estimate.mean_return - rep.markowitz.mean_return;
      rep.gap_std_error = 0.0;
      rep.strict = rep.return_gap > 1e-10;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

DominationReport certify_domination(double k_gain, const ReturnDistribution& dist,
                                    const SimulationConfig& cfg,
                                    const FrontierQuery& query_template) {
  return certify_domination(std::vector<double>{k_gain}, dist, cfg, query_template)[0];
}

}  // namespace ddlab
