#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include "ddlab/errors.hpp"
#include "ddlab/return_model.hpp"
#include "ddlab/summation.hpp"

using namespace ddlab;

TEST_CASE("coin construction and moments") {
  const ReturnDistribution coin = make_coin({1.0, -1.0, 0.6});
  CHECK(coin.size() == 2);
  CHECK(coin.value(0) == 1.0);
  CHECK(coin.value(1) == -1.0);
  CHECK(coin.x_min() == -1.0);
  CHECK(coin.x_max() == 1.0);
  CHECK(coin.mean() == doctest::Approx(0.2).epsilon(1e-15));

  const ReturnDistribution small = make_coin({1.0 / 30, -1.0 / 30, 0.6});
  CHECK(small.mean() == doctest::Approx(1.0 / 150).epsilon(1e-14));
}

TEST_CASE("invalid distributions are rejected") {
  CHECK_THROWS_AS(make_coin({-0.5, -1.0, 0.6}), ConfigError);     // win not positive
  CHECK_THROWS_AS(make_coin({1.0, 0.5, 0.6}), ConfigError);       // loss not negative
  CHECK_THROWS_AS(make_coin({1.0, -1.0, 0.0}), ConfigError);      // degenerate prob
  CHECK_THROWS_AS(make_coin({1.0, -1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(ReturnDistribution::from_outcomes({{0.1, 1.0}}), ConfigError);
  CHECK_THROWS_AS(ReturnDistribution::from_outcomes({{0.1, 0.6}, {0.2, 0.4}}),
                  ConfigError);  // all gains, x_min >= 0
  CHECK_THROWS_AS(ReturnDistribution::from_outcomes({{0.1, 0.7}, {-0.1, 0.4}}),
                  ConfigError);  // mass 1.1
  CHECK_THROWS_AS(ReturnDistribution::from_outcomes({{0.1, 0.5}, {-0.1, 0.5}, {0.2, 0.0}}),
                  ConfigError);  // zero-probability outcome
  const double nan = std::nan("");
  CHECK_THROWS_AS(ReturnDistribution::from_outcomes({{nan, 0.5}, {-0.1, 0.5}}),
                  ConfigError);
}

TEST_CASE("inverse-cdf sampling hits the right buckets") {
  const ReturnDistribution d = ReturnDistribution::from_outcomes(
      {{0.05, 0.25}, {-0.02, 0.5}, {0.5, 0.25}});
  CHECK(d.sample_index(0.0) == 0);
  CHECK(d.sample_index(0.2499) == 0);
  CHECK(d.sample_index(0.25) == 1);  // cdf boundaries belong to the next bucket
  CHECK(d.sample_index(0.74) == 1);
  CHECK(d.sample_index(0.75) == 2);
  CHECK(d.sample_index(std::nextafter(1.0, 0.0)) == 2);

  // empirical frequencies agree with the probabilities
  SubstreamRng rng(31, 2);
  int counts[3] = {0, 0, 0};
  const int n = 120000;
  for (int i = 0; i < n; ++i) ++counts[d.draw(rng)];
  CHECK(std::abs(counts[0] / double(n) - 0.25) < 0.006);
  CHECK(std::abs(counts[1] / double(n) - 0.50) < 0.007);
  CHECK(std::abs(counts[2] / double(n) - 0.25) < 0.006);
}

TEST_CASE("sampled paths are a pure function of (seed, path index)") {
  const ReturnDistribution coin = make_coin({1.0, -1.0, 0.6});
  const std::vector<double> a = sample_path(coin, 32, 5, 17);
  const std::vector<double> b = sample_path(coin, 32, 5, 17);
  CHECK(a == b);
  CHECK(a.size() == 32);
  for (double x : a) CHECK((x == 1.0 || x == -1.0));

  const std::vector<double> c = sample_path(coin, 32, 5, 18);
  CHECK(a != c);
  CHECK_THROWS_AS(sample_path(coin, 0, 5, 17), ConfigError);
}

TEST_CASE("enumeration walks every path exactly once, mass 1") {
  const ReturnDistribution d = ReturnDistribution::from_outcomes(
      {{0.05, 0.25}, {-0.02, 0.5}, {0.5, 0.25}});
  PathEnumerator en(d, 5);
  CHECK(en.total_paths() == 243);  // 3^5

  std::span<const double> path;
  double prob = 0.0;
  CompensatedSum mass;
  std::uint64_t count = 0;
  std::vector<double> first, last;
  while (en.next(path, prob)) {
    if (count == 0) first.assign(path.begin(), path.end());
    last.assign(path.begin(), path.end());
    mass.add(prob);
    ++count;
  }
  CHECK(count == 243);
  CHECK(mass.value() == doctest::Approx(1.0).epsilon(1e-14));
  // lexicographic, last stage fastest
  CHECK(first == std::vector<double>{0.05, 0.05, 0.05, 0.05, 0.05});
  CHECK(last == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5});
  CHECK_FALSE(en.next(path, prob));
}

TEST_CASE("enumeration refuses to exceed its cap") {
  const ReturnDistribution coin = make_coin({1.0, -1.0, 0.6});
  CHECK_NOTHROW(PathEnumerator(coin, 20));  // 2^20 == default cap exactly
  CHECK_THROWS_AS(PathEnumerator(coin, 21), EnumerationLimitError);
  CHECK_NOTHROW(PathEnumerator(coin, 3, 8));
  CHECK_THROWS_AS(PathEnumerator(coin, 4, 8), EnumerationLimitError);
}
