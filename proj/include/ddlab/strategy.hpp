#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ddlab/return_model.hpp"

namespace ddlab {

// Fp slack when comparing a drawdown against its configured cap.
inline constexpr double kDrawdownTol = 1e-12;

// Fixed-fraction rule: I = K * V.
struct MarkowitzStrategy {
  double k_gain = 0.0;
  bool cash_financed = false;  // additionally require |K| <= 1
};

// Drawdown-modulated rule: I = gamma * M * V, M = (d_max - d) / (1 - d).
struct ModulatedStrategy {
  double gamma = 0.0;
  double d_max = 0.5;          // drawdown cap, in (0, 1)
  bool cash_financed = false;  // additionally require |gamma| * d_max <= 1
};

using Strategy = std::variant<MarkowitzStrategy, ModulatedStrategy>;

// Account summary a betting rule sees at each stage.
struct AccountState {
  double v = 1.0;      // current value, >= 0
  double v_max = 1.0;  // running peak, > 0, >= v
  double d = 0.0;      // percentage drawdown to date, (v_max - v) / v_max

  static AccountState fresh(double v0);
};

double markowitz_investment(const MarkowitzStrategy& s, const AccountState& a);

// Modulation factor M(d, d_max) in [0, d_max]. d at or above the cap gives 0
// (betting shuts off); d beyond the cap by more than kDrawdownTol throws
// InvariantError.
double modulation_factor(double d, double d_max);

double modulated_investment(const ModulatedStrategy& s, const AccountState& a);

// Dispatch over the two rules.
double investment(const Strategy& s, const AccountState& a);

struct InvestmentBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Investments at state `a` that keep the drawdown at or below d_max with
// probability one against `dist`:
//   -(d_max - d) v / ((1 - d) x_max)  <=  I  <=  (d_max - d) v / ((1 - d) |x_min|)
InvestmentBounds lemma_bounds(const AccountState& a, double d_max,
                              const ReturnDistribution& dist);

struct AdmissibilityViolation {
  std::string bound;  // "survival_lower" | "survival_upper" | "cash_financing" | "d_max_range"
  std::string detail;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<AdmissibilityViolation> violations;

  std::string summary() const;
};

// Survival bounds against `dist` plus the optional cash-financing constraint.
// Never throws; every violated bound is named.
AdmissibilityReport check_admissible(const Strategy& s, const ReturnDistribution& dist);

}  // namespace ddlab
