#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddlab/rng.hpp"

namespace ddlab {

struct Outcome {
  double value = 0.0;  // per-unit return X for one stage
  double probability = 0.0;
};

struct CoinSpec {
  double win = 1.0;    // > 0
  double loss = -1.0;  // < 0
  double p_win = 0.5;  // in (0, 1)
};

// Finite discrete per-stage return distribution. Mixed sign is required
// (worst outcome a loss, best a gain) so survival bounds and drawdown caps
// are well defined; probabilities are strictly positive and sum to 1 within
// 1e-12.
class ReturnDistribution {
 public:
  static ReturnDistribution from_outcomes(std::vector<Outcome> outcomes);

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  double value(std::size_t i) const { return outcomes_[i].value; }
  double probability(std::size_t i) const { return outcomes_[i].probability; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double mean() const { return mean_; }

  // Inverse-CDF bucket of a uniform draw in [0, 1).
  std::size_t sample_index(double u) const;
  std::size_t draw(SubstreamRng& rng) const { return sample_index(rng.next_unit()); }

 private:
  ReturnDistribution() = default;

  std::vector<Outcome> outcomes_;
  std::vector<double> cdf_;
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  double mean_ = 0.0;
};

ReturnDistribution make_coin(const CoinSpec& spec);

// Returns for one path drawn from the (master_seed, path_index) substream.
// Bit-identical for equal arguments regardless of caller thread or ordering.
std::vector<double> sample_path(const ReturnDistribution& dist, int n_stages,
                                SubstreamRng& stream);
std::vector<double> sample_path(const ReturnDistribution& dist, int n_stages,
                                std::uint64_t master_seed, std::uint64_t path_index);

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 20;

// Exhaustive walk over all |outcomes|^n return sequences in lexicographic
// outcome-index order, together with each sequence's probability. Refuses at
// construction to enumerate more than `cap` paths.
class PathEnumerator {
 public:
  PathEnumerator(const ReturnDistribution& dist, int n_stages,
                 std::uint64_t cap = kDefaultEnumerationCap);

  // Points `returns` at the next path (valid until the next call) and fills
  // its probability; returns false once all paths have been produced.
  bool next(std::span<const double>& returns, double& probability);

  std::uint64_t total_paths() const { return total_; }

 private:
  const ReturnDistribution* dist_;
  int n_;
  std::uint64_t total_ = 0;
  std::uint64_t produced_ = 0;
  std::vector<std::size_t> digits_;
  std::vector<double> values_;
};

}  // namespace ddlab
