#include <doctest.h>

#include <cmath>
#include <variant>
#include <vector>

#include "ddlab/errors.hpp"
#include "ddlab/frontier.hpp"

using namespace ddlab;

namespace {

const ReturnDistribution kEvens = make_coin({1.0, -1.0, 0.6});
const ReturnDistribution kSmall = make_coin({1.0 / 30, -1.0 / 30, 0.6});

FrontierPoint fake_point(double gamma, double dmax, double ret, double dd) {
  FrontierPoint p;
  p.params = ModulatedStrategy{gamma, dmax, true};
  p.estimate.mean_return = ret;
  p.estimate.mean_max_drawdown = dd;
  return p;
}

}  // namespace

TEST_CASE("default search grids") {
  const std::vector<double> dm = default_dmax_grid();
  REQUIRE(dm.size() == 99);
  CHECK(dm.front() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(dm.back() == doctest::Approx(0.99).epsilon(1e-12));
  for (std::size_t i = 1; i < dm.size(); ++i) CHECK(dm[i] > dm[i - 1]);
  for (double d : dm) CHECK((d > 0.0 && d < 1.0));

  // gains span [0, min(survival, cash-with-smallest-cap)]
  const std::vector<double> g = default_gamma_grid(kEvens, {0.5}, 11);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(1.0).epsilon(1e-12));  // survival binds

  const std::vector<double> g2 = default_gamma_grid(kSmall, {0.5}, 5);
  CHECK(g2.back() == doctest::Approx(2.0).epsilon(1e-12));  // cash binds: 1/0.5

  CHECK_THROWS_AS(default_dmax_grid(0), ConfigError);
  CHECK_THROWS_AS(default_gamma_grid(kEvens, {}, 5), ConfigError);
  CHECK_THROWS_AS(default_gamma_grid(kEvens, {0.5}, 1), ConfigError);
}

TEST_CASE("fixed-fraction curve on the two-stage coin") {
  SimulationConfig cfg{1.0, 2};
  EstimatorOptions en;
  en.method = EstimatorMethod::enumeration;
  const std::vector<FrontierPoint> curve =
      markowitz_curve({0.0, 0.5, 1.0}, kEvens, cfg, en);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].estimate.mean_return == 0.0);
  CHECK(curve[0].estimate.mean_max_drawdown == 0.0);
  CHECK(curve[1].estimate.mean_return == doctest::Approx(0.21).epsilon(1e-12));
  CHECK(curve[1].estimate.mean_max_drawdown == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(curve[2].estimate.mean_return == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(curve[2].estimate.mean_max_drawdown == doctest::Approx(0.64).epsilon(1e-12));

  CHECK_THROWS_AS(markowitz_curve({}, kEvens, cfg, en), ConfigError);
  CHECK_THROWS_AS(markowitz_curve({5.0}, kEvens, cfg, en), ConfigError);
}

TEST_CASE("curve evaluation through a shared table matches direct estimation") {
  SimulationConfig cfg{1.0, 12};
  EstimatorOptions mc;
  mc.method = EstimatorMethod::monte_carlo;
  mc.paths = 10'000;
  mc.seed = 42;
  const std::vector<FrontierPoint> curve = markowitz_curve({0.2, 0.7}, kEvens, cfg, mc);
  for (const FrontierPoint& p : curve) {
    const auto& st = std::get<MarkowitzStrategy>(p.params);
    const RiskReturnEstimate direct =
        monte_carlo_estimate(Strategy{st}, kEvens, cfg, 10'000, 42, 1);
    CHECK(p.estimate.mean_return == direct.mean_return);
    CHECK(p.estimate.mean_max_drawdown == direct.mean_max_drawdown);
  }
}

TEST_CASE("grid evaluation validates gains and caps, skips cash-infeasible pairs") {
  SimulationConfig cfg{1.0, 4};
  FrontierQuery q;
  q.backend.method = EstimatorMethod::enumeration;

  q.gamma_grid = {0.0, 1.5};  // 1.5 beyond survival for the even coin
  q.dmax_grid = {0.5};
  CHECK_THROWS_AS(evaluate_modulated_grid(q, kEvens, cfg), ConfigError);

  q.gamma_grid = {0.5};
  q.dmax_grid = {0.5, 1.0};
  CHECK_THROWS_AS(evaluate_modulated_grid(q, kEvens, cfg), ConfigError);

  q.gamma_grid = {};
  q.dmax_grid = {0.5};
  CHECK_THROWS_AS(evaluate_modulated_grid(q, kEvens, cfg), ConfigError);

  // gamma 3 survives the small coin; cash financing kills only the 0.5 cap
  q.gamma_grid = {3.0};
  q.dmax_grid = {0.2, 0.5};
  q.cash_financed = true;
  CHECK(evaluate_modulated_grid(q, kSmall, cfg).size() == 1);
  q.cash_financed = false;
  CHECK(evaluate_modulated_grid(q, kSmall, cfg).size() == 2);
}

TEST_CASE("target selection: band, best, nearest, tie rules") {
  std::vector<FrontierPoint> pts;
  pts.push_back(fake_point(0.2, 0.30, 0.10, 0.100));
  pts.push_back(fake_point(0.4, 0.20, 0.14, 0.102));
  pts.push_back(fake_point(0.6, 0.40, 0.14, 0.099));
  pts.push_back(fake_point(0.8, 0.50, 0.20, 0.180));

  const FrontierSelection sel = select_for_target(pts, 0.1, 0.005);
  REQUIRE(sel.best.has_value());
  // two candidates tie on return 0.14 inside the band: smaller cap wins
  CHECK(std::get<ModulatedStrategy>(sel.best->params).d_max == 0.20);
  CHECK(sel.best->feasible);
  REQUIRE(sel.nearest.has_value());
  CHECK(sel.nearest->estimate.mean_max_drawdown == 0.100);

  // gamma tie-break once returns and caps both tie
  std::vector<FrontierPoint> ties;
  ties.push_back(fake_point(-0.9, 0.20, 0.05, 0.100));
  ties.push_back(fake_point(0.3, 0.20, 0.05, 0.100));
  const FrontierSelection tsel = select_for_target(ties, 0.1, 0.01);
  REQUIRE(tsel.best.has_value());
  CHECK(std::get<ModulatedStrategy>(tsel.best->params).gamma == 0.3);

  // nothing inside the band
  const FrontierSelection none = select_for_target(pts, 0.5, 0.01);
  CHECK_FALSE(none.best.has_value());
  REQUIRE(none.nearest.has_value());
  CHECK(none.nearest->estimate.mean_max_drawdown == 0.180);

  CHECK_THROWS_AS(select_for_target(pts, 0.1, -0.1), ConfigError);
}

TEST_CASE("constrained maximization on the two-stage coin") {
  SimulationConfig cfg{1.0, 2};
  FrontierQuery q;
  q.backend.method = EstimatorMethod::enumeration;
  q.gamma_grid = {0.5, 1.0};
  q.dmax_grid = {0.3, 0.5625};
  q.target_drawdown = 0.36;
  q.tolerance = 1e-9;

  const FrontierResult res = maximize_modulated_return(q, kEvens, cfg);
  REQUIRE(res.evaluated.size() == 4);
  REQUIRE(res.best.has_value());
  const auto& win = std::get<ModulatedStrategy>(res.best->params);
  CHECK(win.gamma == 1.0);
  CHECK(win.d_max == 0.5625);
  CHECK(res.best->estimate.mean_return == doctest::Approx(0.21796875).epsilon(1e-12));
  int feasible = 0;
  for (const FrontierPoint& p : res.evaluated) feasible += p.feasible ? 1 : 0;
  CHECK(feasible == 1);

  q.target_drawdown = 0.999;  // far beyond anything the grid reaches
  const FrontierResult far = maximize_modulated_return(q, kEvens, cfg);
  CHECK_FALSE(far.best.has_value());
  REQUIRE(far.nearest.has_value());
}

TEST_CASE("domination certificate on the two-stage coin") {
  SimulationConfig cfg{1.0, 2};
  FrontierQuery tmpl;
  tmpl.backend.method = EstimatorMethod::enumeration;
  tmpl.gamma_grid = {0.5, 1.0};
  tmpl.dmax_grid = {0.3, 0.5625, 0.7};
  tmpl.tolerance = 1e-6;

  const DominationReport rep = certify_domination(0.5, kEvens, cfg, tmpl);
  CHECK(rep.k_gain == 0.5);
  CHECK(rep.target_drawdown == doctest::Approx(0.36).epsilon(1e-12));
  const auto& best = std::get<ModulatedStrategy>(rep.best.params);
  CHECK(best.gamma == 1.0);
  CHECK(best.d_max == 0.5625);
  CHECK(rep.return_gap == doctest::Approx(0.00796875).epsilon(1e-9));
  CHECK(rep.gap_std_error == 0.0);
  CHECK(rep.strict);

  CHECK_THROWS_AS(certify_domination(5.0, kEvens, cfg, tmpl), ConfigError);
  CHECK_THROWS_AS(certify_domination(std::vector<double>{}, kEvens, cfg, tmpl),
                  ConfigError);
}

TEST_CASE("certificate falls back to the replicating cap when the grid misses") {
  SimulationConfig cfg{1.0, 2};
  FrontierQuery tmpl;
  tmpl.backend.method = EstimatorMethod::enumeration;
  tmpl.gamma_grid = {0.1};  // nowhere near the 0.36 target
  tmpl.dmax_grid = {0.1};
  tmpl.tolerance = 1e-6;

  const DominationReport rep = certify_domination(0.5, kEvens, cfg, tmpl);
  const auto& best = std::get<ModulatedStrategy>(rep.best.params);
  CHECK(best.gamma == 0.5);
  CHECK(best.d_max == kReplicationDmax);
  // the replicating rule neither gains nor loses measurably
  CHECK(std::abs(rep.return_gap) < 1e-9);
  CHECK_FALSE(rep.strict);
}

TEST_CASE("batched certificates share the target derivation") {
  SimulationConfig cfg{1.0, 8};
  FrontierQuery tmpl;
  tmpl.backend.method = EstimatorMethod::monte_carlo;
  tmpl.backend.paths = 8'000;
  tmpl.backend.seed = 17;
  tmpl.gamma_grid = {0.5, 1.0, 2.0, 4.0};
  tmpl.dmax_grid = {0.05, 0.1, 0.2, 0.4};
  tmpl.tolerance = 0.01;

  const std::vector<DominationReport> reps =
      certify_domination({0.3, 0.6}, kSmall, cfg, tmpl);
  REQUIRE(reps.size() == 2);
  for (const DominationReport& r : reps) {
    CHECK(r.target_drawdown == r.markowitz.mean_max_drawdown);
    CHECK(std::abs(r.best.estimate.mean_max_drawdown - r.target_drawdown) <=
          tmpl.tolerance + 1e-15);
    CHECK(r.gap_std_error >= 0.0);
    // no statistically significant anti-domination
    CHECK(r.return_gap > -4.0 * r.gap_std_error - 1e-12);
  }
  CHECK(reps[0].target_drawdown < reps[1].target_drawdown);
}
