#include "ddlab/return_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddlab/errors.hpp"
#include "ddlab/summation.hpp"

namespace ddlab {

ReturnDistribution ReturnDistribution::from_outcomes(std::vector<Outcome> outcomes) {
  if (outcomes.size() < 2) {
    throw ConfigError("return distribution needs at least two outcomes, got " +
                      std::to_string(outcomes.size()));
  }

  CompensatedSum mass;
  CompensatedSum mean;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Outcome& o : outcomes) {
    if (!std::isfinite(o.value) || !std::isfinite(o.probability)) {
      throw ConfigError("return distribution outcomes must be finite");
    }
    if (o.probability <= 0.0) {
      throw ConfigError("outcome probability must be strictly positive, got " +
                        std::to_string(o.probability));
    }
    mass.add(o.probability);
    mean.add(o.probability * o.value);
    lo = std::min(lo, o.value);
    hi = std::max(hi, o.value);
  }
  if (std::abs(mass.value() - 1.0) > 1e-12) {
    throw ConfigError("outcome probabilities must sum to 1 within 1e-12, got " +
                      std::to_string(mass.value()));
  }
  if (!(lo < 0.0) || !(hi > 0.0)) {
    throw ConfigError("return distribution must mix signs: x_min < 0 < x_max required");
  }

  ReturnDistribution d;
  d.outcomes_ = std::move(outcomes);
  d.x_min_ = lo;
  d.x_max_ = hi;
  d.mean_ = mean.value();
  d.cdf_.reserve(d.outcomes_.size());
  CompensatedSum cum;
  for (const Outcome& o : d.outcomes_) {
    cum.add(o.probability);
    d.cdf_.push_back(cum.value());
  }
  d.cdf_.back() = 1.0;  // absorb fp dust so sample_index never falls off
  return d;
}

std::size_t ReturnDistribution::sample_index(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::size_t>(it - cdf_.begin());
}

ReturnDistribution make_coin(const CoinSpec& spec) {
  if (!(spec.win > 0.0)) {
    throw ConfigError("coin win return must be positive, got " + std::to_string(spec.win));
  }
  if (!(spec.loss < 0.0)) {
    throw ConfigError("coin loss return must be negative, got " + std::to_string(spec.loss));
  }
  if (!(spec.p_win > 0.0 && spec.p_win < 1.0)) {
    throw ConfigError("coin win probability must lie in (0, 1), got " +
                      std::to_string(spec.p_win));
  }
  return ReturnDistribution::from_outcomes(
      {{spec.win, spec.p_win}, {spec.loss, 1.0 - spec.p_win}});
}

std::vector<double> sample_path(const ReturnDistribution& dist, int n_stages,
                                SubstreamRng& stream) {
  if (n_stages < 1) {
    throw ConfigError("sample_path needs at least one stage");
  }
  std::vector<double> xs(static_cast<std::size_t>(n_stages));
  for (double& x : xs) x = dist.value(dist.draw(stream));
  return xs;
}

std::vector<double> sample_path(const ReturnDistribution& dist, int n_stages,
                                std::uint64_t master_seed, std::uint64_t path_index) {
  SubstreamRng stream(master_seed, path_index);
  return sample_path(dist, n_stages, stream);
}

PathEnumerator::PathEnumerator(const ReturnDistribution& dist, int n_stages,
                               std::uint64_t cap)
    : dist_(&dist), n_(n_stages) {
  if (n_stages < 1) {
    throw ConfigError("path enumeration needs at least one stage");
  }
  const std::uint64_t m = dist.size();
  total_ = 1;
  for (int k = 0; k < n_stages; ++k) {
    if (total_ > cap / m) {
      throw EnumerationLimitError(
          "exhaustive enumeration of " + std::to_string(dist.size()) + "^" +
          std::to_string(n_stages) + " paths exceeds cap " + std::to_string(cap));
    }
    total_ *= m;
  }
  digits_.assign(static_cast<std::size_t>(n_stages), 0);
  values_.assign(static_cast<std::size_t>(n_stages), 0.0);
}

bool PathEnumerator::next(std::span<const double>& returns, double& probability) {
  if (produced_ == total_) return false;
  if (produced_ > 0) {
    // odometer increment, last stage fastest
    int k = n_ - 1;
    while (k >= 0) {
      if (++digits_[static_cast<std::size_t>(k)] < dist_->size()) break;
      digits_[static_cast<std::size_t>(k)] = 0;
      --k;
    }
  }
  double prob = 1.0;
  for (int k = 0; k < n_; ++k) {
    const std::size_t i = digits_[static_cast<std::size_t>(k)];
    values_[static_cast<std::size_t>(k)] = dist_->value(i);
    prob *= dist_->probability(i);
  }
  returns = values_;
  probability = prob;
  ++produced_;
  return true;
}

}  // namespace ddlab
