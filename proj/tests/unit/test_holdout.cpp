#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prefsamp/error.hpp"
#include "prefsamp/experiment.hpp"
#include "prefsamp/holdout.hpp"
#include "prefsamp/rng.hpp"

using namespace prefsamp;

namespace {

BivariateDataset indexed(std::size_t n, std::uint64_t seed = 1) {
  Rng rng(seed);
  BivariateDataset d;
  d.covariates = CoordinateCovariates::intercept_only();
  for (std::size_t i = 0; i < n; ++i) {
    d.sites.push_back({rng.uniform_open(), rng.uniform_open()});
    d.y1.push_back(static_cast<double>(i));
    d.y2.push_back(-static_cast<double>(i));
    d.obs1.push_back(1);
    d.obs2.push_back(1);
  }
  return d;
}

std::set<std::size_t> observed_original(const BivariateDataset& d, const std::vector<std::size_t>& idx, int j) {
  std::set<std::size_t> out;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (d.observed(j, k)) out.insert(idx[k]);
  return out;
}

// Per response: train and test partition the observed sites.
void check_partition(const BivariateDataset& data, const HoldoutSplit& s) {
  for (int j = 0; j < 2; ++j) {
    const auto tr = observed_original(s.train, s.train_sites, j);
    const auto te = observed_original(s.test, s.test_sites, j);
    std::vector<std::size_t> both;
    std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
    CHECK(both.empty());
    std::size_t expected = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!data.observed(j, i)) continue;
      ++expected;
      CHECK((tr.count(i) + te.count(i)) == 1);
    }
    CHECK(tr.size() + te.size() == expected);
  }
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {HoldoutStrategy::Random, HoldoutStrategy::DescendingY1, HoldoutStrategy::DescendingY2})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK(parse_strategy("II-a") == HoldoutStrategy::DescendingY1);
  CHECK_THROWS_AS(parse_strategy("sideways"), InvalidArgument);
}

TEST_CASE("descending split on ten sites") {
  const BivariateDataset d = indexed(10);
  const HoldoutSplit s = make_holdout(d, {HoldoutStrategy::DescendingY1, 0.2, 0.5, Scenario::Shared, 3});
  CHECK(s.train_sites.size() == 5);
  CHECK(s.test_sites.size() == 5);
  CHECK(std::count(s.train_sites.begin(), s.train_sites.end(), 9) == 1);
  CHECK(std::count(s.train_sites.begin(), s.train_sites.end(), 8) == 1);
  check_partition(d, s);
}

TEST_CASE("random split on ten sites") {
  const BivariateDataset d = indexed(10);
  const HoldoutSplit s = make_holdout(d, {HoldoutStrategy::Random, 0.2, 0.5, Scenario::Shared, 4});
  CHECK(s.train_sites.size() == 5);
  CHECK(s.test_sites.size() == 5);
  check_partition(d, s);
  CHECK(std::all_of(s.train.y1.begin(), s.train.y1.end(), [](double v) { return std::isfinite(v); }));
}

TEST_CASE("p = 0.5 trains on the top half") {
  const BivariateDataset d = indexed(20);
  const HoldoutSplit a = make_holdout(d, {HoldoutStrategy::DescendingY1, 0.5, 0.5, Scenario::Shared, 5});
  CHECK(a.train_sites == std::vector<std::size_t>{10, 11, 12, 13, 14, 15, 16, 17, 18, 19});
  const HoldoutSplit b = make_holdout(d, {HoldoutStrategy::DescendingY2, 0.5, 0.5, Scenario::Shared, 5});
  CHECK(b.train_sites == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("invalid fractions are rejected") {
  const BivariateDataset d = indexed(10);
  CHECK_THROWS_AS(make_holdout(d, {HoldoutStrategy::Random, 0.6, 0.5, Scenario::Shared, 1}), InvalidArgument);
  CHECK_THROWS_AS(make_holdout(d, {HoldoutStrategy::Random, -0.1, 0.5, Scenario::Shared, 1}), InvalidArgument);
  CHECK_THROWS_AS(make_holdout(d, {HoldoutStrategy::Random, 0.1, 0.0, Scenario::Shared, 1}), InvalidArgument);
  CHECK_THROWS_AS(make_holdout(indexed(1), {HoldoutStrategy::Random, 0.1, 0.5, Scenario::Shared, 1}), InvalidArgument);
}

TEST_CASE("splits are deterministic in the seed and partition every scenario") {
  BivariateDataset d = indexed(101, 7);
  Rng rng(8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d.y1[i] = rng.normal();
    d.y2[i] = rng.normal();
  }
  for (auto strat : {HoldoutStrategy::Random, HoldoutStrategy::DescendingY1, HoldoutStrategy::DescendingY2})
    for (double p : {0.0, 0.2, 0.35, 0.5}) {
      CAPTURE(to_string(strat));
      CAPTURE(p);
      const HoldoutSpec spec{strat, p, 0.5, Scenario::Shared, 11};
      const HoldoutSplit a = make_holdout(d, spec), b = make_holdout(d, spec);
      CHECK(a.train_sites == b.train_sites);
      CHECK(a.test_sites == b.test_sites);
      check_partition(d, a);
      CHECK(a.train_sites.size() == 50);
    }
  const HoldoutSplit a = make_holdout(d, {HoldoutStrategy::Random, 0.2, 0.5, Scenario::Shared, 11});
  const HoldoutSplit c = make_holdout(d, {HoldoutStrategy::Random, 0.2, 0.5, Scenario::Shared, 12});
  CHECK(a.train_sites != c.train_sites);
}

TEST_CASE("overlapping split shares exactly the common block") {
  BivariateDataset d = indexed(200, 9);
  Rng rng(10);
  for (std::size_t i = 0; i < d.size(); ++i) d.y1[i] = rng.normal();
  for (auto strat : {HoldoutStrategy::Random, HoldoutStrategy::DescendingY1}) {
    const HoldoutSplit s = make_holdout(d, {strat, 0.2, 0.5, Scenario::Overlapping, 13});
    check_partition(d, s);
    const auto t1 = observed_original(s.train, s.train_sites, 0), t2 = observed_original(s.train, s.train_sites, 1);
    CHECK(t1.size() == 100);
    CHECK(t2.size() == 100);
    std::vector<std::size_t> common;
    std::set_intersection(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(common));
    CHECK(common.size() >= 40);
    if (strat == HoldoutStrategy::DescendingY1) {
      // the 40 largest y1 are all in the common block
      std::vector<std::size_t> order(d.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d.y1[a] > d.y1[b]; });
      for (int k = 0; k < 40; ++k) CHECK(std::binary_search(common.begin(), common.end(), order[k]));
    }
  }
}

TEST_CASE("disjoint split keeps each pattern separate") {
  BivariateDataset d = indexed(60, 14);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool first = i < 30;
    d.obs1[i] = first;
    d.obs2[i] = !first;
    if (!first) d.y1[i] = std::nan("");
    else d.y2[i] = std::nan("");
  }
  const HoldoutSplit s = make_holdout(d, {HoldoutStrategy::DescendingY1, 0.2, 0.5, Scenario::Disjoint, 15});
  check_partition(d, s);
  const auto t1 = observed_original(s.train, s.train_sites, 0), t2 = observed_original(s.train, s.train_sites, 1);
  CHECK(t1.size() == 15);
  CHECK(t2.size() == 15);
  // top floor(30 * 0.2) = 6 of pattern 1 by y1
  for (std::size_t i = 24; i < 30; ++i) CHECK(t1.count(i) == 1);
}

TEST_CASE("descending holdout biases the training mean upward") {
  ExperimentConfig c;
  c.seed = 2024;
  c.truth.grid_resolution = 20;
  c.truth.ps = {1.0, 0.3};
  c.truth.coreg = {0.0, 0.0, 0.0};
  const BivariateDataset d = simulate_experiment(c).data;
  auto train_mean = [&](HoldoutStrategy s, double p) {
    double sum = 0.0;
    int reps = 20;
    for (int r = 0; r < reps; ++r) {
      const HoldoutSplit h = make_holdout(d, {s, p, 0.5, Scenario::Shared, static_cast<std::uint64_t>(100 + r)});
      sum += std::accumulate(h.train.y1.begin(), h.train.y1.end(), 0.0) / static_cast<double>(h.train.size());
    }
    return sum / reps;
  };
  const double m0 = train_mean(HoldoutStrategy::Random, 0.0);
  const double m20 = train_mean(HoldoutStrategy::DescendingY1, 0.2);
  const double m35 = train_mean(HoldoutStrategy::DescendingY1, 0.35);
  CHECK(m20 > m0);
  CHECK(m35 > m20);
}

TEST_CASE("biased pair sample") {
  BivariateDataset d = indexed(624, 16);
  Rng rng(17);
  for (std::size_t i = 0; i < d.size(); ++i) d.y1[i] = rng.normal();
  const BivariateDataset b = biased_pair_sample(d, 0.7, 0);
  CHECK(b.size() == 437);
  const double cut = *std::min_element(b.y1.begin(), b.y1.end());
  CHECK(std::count_if(d.y1.begin(), d.y1.end(), [&](double v) { return v >= cut; }) == 437);
  CHECK(b.observed_count(1) == 437);

  const BivariateDataset id = biased_pair_sample(d, 1.0, 0);
  CHECK(id.y1 == d.y1);
  CHECK(id.y2 == d.y2);

  const BivariateDataset mono = biased_pair_sample(indexed(10), 0.3, 0);
  CHECK(mono.y1 == std::vector<double>{7.0, 8.0, 9.0});

  CHECK_THROWS_AS(biased_pair_sample(d, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(biased_pair_sample(BivariateDataset{}, 0.5, 0), InvalidArgument);
}
