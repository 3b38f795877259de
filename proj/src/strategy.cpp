#include "ddlab/strategy.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

AccountState AccountState::fresh(double v0) {
  assert(v0 > 0.0);
  return {v0, v0, 0.0};
}

double markowitz_investment(const MarkowitzStrategy& s, const AccountState& a) {
  return s.k_gain * a.v;
}

double modulation_factor(double d, double d_max) {
  if (!(d_max > 0.0 && d_max < 1.0)) {
    throw InvariantError("drawdown cap must lie in (0, 1), got " + fmt(d_max));
  }
  if (d < -kDrawdownTol || d > 1.0 + kDrawdownTol) {
    throw InvariantError("drawdown must lie in [0, 1], got " + fmt(d));
  }
  if (d >= d_max) {
    if (d > d_max + kDrawdownTol) {
      throw InvariantError("drawdown " + fmt(d) + " exceeds cap " + fmt(d_max) +
                           " beyond tolerance: cap guarantee broken upstream");
    }
    return 0.0;
  }
  const double m = (d_max - d) / (1.0 - d);
  // rounding can nudge m past either end of [0, d_max]
  if (m < 0.0) return 0.0;
  if (m > d_max) return d_max;
  return m;
}

double modulated_investment(const ModulatedStrategy& s, const AccountState& a) {
  const double m = modulation_factor(a.d, s.d_max);
  const double amount = s.gamma * m * a.v;
  assert(!s.cash_financed || std::abs(amount) <= a.v * (1.0 + kDrawdownTol));
  return amount;
}

double investment(const Strategy& s, const AccountState& a) {
  return std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, MarkowitzStrategy>) {
          return markowitz_investment(rule, a);
        } else {
          return modulated_investment(rule, a);
        }
      },
      s);
}

InvestmentBounds lemma_bounds(const AccountState& a, double d_max,
                              const ReturnDistribution& dist) {
  const double m = modulation_factor(a.d, d_max);
  return {-m * a.v / dist.x_max(), m * a.v / -dist.x_min()};
}

std::string AdmissibilityReport::summary() const {
  if (admissible) return "admissible";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.bound + ": " + v.detail;
  }
  return out;
}

namespace {

// Inclusive bounds with a sliver of fp slack so boundary strategies like
// K = 1/|x_min| written as a decimal stay admissible.
bool below(double x, double lo) { return x < lo - 1e-12 * std::max(1.0, std::abs(lo)); }
bool above(double x, double hi) { return x > hi + 1e-12 * std::max(1.0, std::abs(hi)); }

void check_survival(double gain, const ReturnDistribution& dist, AdmissibilityReport* r) {
  const double lo = -1.0 / dist.x_max();
  const double hi = 1.0 / -dist.x_min();
  if (below(gain, lo)) {
    r->admissible = false;
    r->violations.push_back({"survival_lower",
                             fmt(gain) + " < -1/x_max = " + fmt(lo) +
                                 ": one best-case return could wipe the short position"});
  }
  if (above(gain, hi)) {
    r->admissible = false;
    r->violations.push_back({"survival_upper",
                             fmt(gain) + " > 1/|x_min| = " + fmt(hi) +
                                 ": one worst-case return could wipe the account"});
  }
}

}  // namespace

AdmissibilityReport check_admissible(const Strategy& s, const ReturnDistribution& dist) {
  AdmissibilityReport r;
  if (const auto* mk = std::get_if<MarkowitzStrategy>(&s)) {
    check_survival(mk->k_gain, dist, &r);
    if (mk->cash_financed && above(std::abs(mk->k_gain), 1.0)) {
      r.admissible = false;
      r.violations.push_back(
          {"cash_financing", "|K| = " + fmt(std::abs(mk->k_gain)) + " > 1"});
    }
  } else {
    const auto& md = std::get<ModulatedStrategy>(s);
    if (!(md.d_max > 0.0 && md.d_max < 1.0)) {
      r.admissible = false;
      r.violations.push_back(
          {"d_max_range", "d_max = " + fmt(md.d_max) + " outside (0, 1)"});
    }
    check_survival(md.gamma, dist, &r);
    if (md.cash_financed && above(std::abs(md.gamma) * md.d_max, 1.0)) {
      r.admissible = false;
      r.violations.push_back({"cash_financing", "|gamma| * d_max = " +
                                                    fmt(std::abs(md.gamma) * md.d_max) +
                                                    " > 1"});
    }
  }
  return r;
}

}  // namespace ddlab
