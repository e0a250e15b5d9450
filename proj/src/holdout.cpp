#include "prefsamp/holdout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prefsamp/error.hpp"
#include "prefsamp/rng.hpp"

namespace prefsamp {

std::string to_string(HoldoutStrategy s) {
  switch (s) {
    case HoldoutStrategy::Random: return "random";
    case HoldoutStrategy::DescendingY1: return "desc_y1";
    case HoldoutStrategy::DescendingY2: return "desc_y2";
  }
  return "?";
}

HoldoutStrategy parse_strategy(const std::string& s) {
  if (s == "random" || s == "I") return HoldoutStrategy::Random;
  if (s == "desc_y1" || s == "II-a") return HoldoutStrategy::DescendingY1;
  if (s == "desc_y2" || s == "II-b") return HoldoutStrategy::DescendingY2;
  throw InvalidArgument("unknown holdout strategy '" + s + "'");
}

void HoldoutSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw InvalidArgument("train_fraction must lie in (0, 1]");
  if (!(p >= 0.0 && p <= train_fraction))
    throw InvalidArgument("p must lie in [0, train_fraction]; got " + std::to_string(p));
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::size_t floor_count(std::size_t n, double f) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
}

// Indices of `pool` sorted by response `j` descending, ties by position.
std::vector<std::size_t> by_descending(const BivariateDataset& d, std::vector<std::size_t> pool, int j) {
  std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) { return d.y(j, a) > d.y(j, b); });
  return pool;
}

// Picks `biased` sites by the descending order of `order_by` (or at random
// when order_by < 0), then `random` more uniformly from the rest.
std::vector<std::size_t> choose(const BivariateDataset& d, const std::vector<std::size_t>& pool, int order_by,
                                std::size_t biased, std::size_t random, Rng& rng) {
  std::vector<std::size_t> ordered = pool;
  if (order_by >= 0) {
    ordered = by_descending(d, pool, order_by);
    std::vector<std::size_t> rest(ordered.begin() + static_cast<std::ptrdiff_t>(biased), ordered.end());
    shuffle(rest, rng);
    std::copy(rest.begin(), rest.end(), ordered.begin() + static_cast<std::ptrdiff_t>(biased));
  } else {
    shuffle(ordered, rng);
  }
  ordered.resize(biased + random);
  std::sort(ordered.begin(), ordered.end());
  return ordered;
}

int order_response(HoldoutStrategy s) {
  return s == HoldoutStrategy::DescendingY1 ? 0 : s == HoldoutStrategy::DescendingY2 ? 1 : -1;
}

}  // namespace

HoldoutSplit make_holdout(const BivariateDataset& data, const HoldoutSpec& spec) {
  spec.validate();
  data.validate_for(spec.scenario);
  const std::size_t n = data.size();
  if (n < 2) throw InvalidArgument("holdout needs at least two sites");
  Rng rng(spec.seed);
  const int order_by = order_response(spec.strategy);

  // train_mask[j][i]: response j at site i used for fitting.
  std::vector<std::vector<std::uint8_t>> train_mask(2, std::vector<std::uint8_t>(n, 0));

  if (spec.scenario == Scenario::Shared) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t total = floor_count(n, spec.train_fraction);
    const std::size_t biased = order_by >= 0 ? floor_count(n, spec.p) : 0;
    for (std::size_t i : choose(data, all, order_by, biased, total - biased, rng)) train_mask[0][i] = train_mask[1][i] = 1;
  } else if (spec.scenario == Scenario::Overlapping) {
    // A common block of floor(n p) sites, then an independent random block per response.
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t total = floor_count(n, spec.train_fraction);
    const std::size_t common = floor_count(n, spec.p);
    std::vector<std::size_t> ordered = order_by >= 0 ? by_descending(data, all, order_by) : all;
    if (order_by < 0) shuffle(ordered, rng);
    std::vector<std::size_t> rest(ordered.begin() + static_cast<std::ptrdiff_t>(common), ordered.end());
    for (std::size_t k = 0; k < common; ++k) train_mask[0][ordered[k]] = train_mask[1][ordered[k]] = 1;
    for (int j = 0; j < 2; ++j) {
      std::vector<std::size_t> r = rest;
      shuffle(r, rng);
      for (std::size_t k = 0; k < total - common; ++k) train_mask[static_cast<std::size_t>(j)][r[k]] = 1;
    }
  } else {
    // Disjoint: split each pattern on its own; the descending rule biases only
    // the pattern carrying the named response.
    for (int j = 0; j < 2; ++j) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < n; ++i)
        if (data.observed(j, i)) pool.push_back(i);
      const std::size_t total = floor_count(pool.size(), spec.train_fraction);
      const int ob = order_by == j ? j : -1;
      const std::size_t biased = ob >= 0 ? floor_count(pool.size(), spec.p) : 0;
      for (std::size_t i : choose(data, pool, ob, biased, total - biased, rng)) train_mask[static_cast<std::size_t>(j)][i] = 1;
    }
  }

  HoldoutSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_train = (data.obs1[i] && train_mask[0][i]) || (data.obs2[i] && train_mask[1][i]);
    const bool in_test = (data.obs1[i] && !train_mask[0][i]) || (data.obs2[i] && !train_mask[1][i]);
    if (in_train) out.train_sites.push_back(i);
    if (in_test) out.test_sites.push_back(i);
  }
  out.train = data.subset(out.train_sites);
  for (std::size_t k = 0; k < out.train_sites.size(); ++k) {
    const std::size_t i = out.train_sites[k];
    out.train.obs1[k] = data.obs1[i] && train_mask[0][i];
    out.train.obs2[k] = data.obs2[i] && train_mask[1][i];
  }
  out.test = data.subset(out.test_sites);
  for (std::size_t k = 0; k < out.test_sites.size(); ++k) {
    const std::size_t i = out.test_sites[k];
    out.test.obs1[k] = data.obs1[i] && !train_mask[0][i];
    out.test.obs2[k] = data.obs2[i] && !train_mask[1][i];
  }
  for (auto* d : {&out.train, &out.test})
    for (std::size_t k = 0; k < d->size(); ++k) {
      if (!d->obs1[k]) d->y1[k] = std::numeric_limits<double>::quiet_NaN();
      if (!d->obs2[k]) d->y2[k] = std::numeric_limits<double>::quiet_NaN();
    }
  return out;
}

BivariateDataset biased_pair_sample(const BivariateDataset& data, double fraction, int order_by) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  if (order_by != 0 && order_by != 1) throw InvalidArgument("order_by must be 0 or 1");
  if (data.size() == 0) throw InvalidArgument("cannot subsample an empty dataset");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.observed(order_by, i)) pool.push_back(i);
  if (pool.size() != data.size()) throw InvalidArgument("biased subsampling needs the ordering response at every site");
  const auto keep = static_cast<std::size_t>(std::ceil(static_cast<double>(data.size()) * fraction - 1e-9));
  std::vector<std::size_t> idx = by_descending(data, pool, order_by);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return data.subset(idx);
}

}  // namespace prefsamp
