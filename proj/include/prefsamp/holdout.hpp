#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefsamp/model.hpp"

namespace prefsamp {

enum class HoldoutStrategy { Random, DescendingY1, DescendingY2 };

std::string to_string(HoldoutStrategy s);
HoldoutStrategy parse_strategy(const std::string& s);

struct HoldoutSpec {
  HoldoutStrategy strategy = HoldoutStrategy::Random;
  double p = 0.2;               // fraction chosen by the descending order (or common block)
  double train_fraction = 0.5;
  Scenario scenario = Scenario::Shared;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Training and test data over the original sites. Masks say which
/// responses are used for fitting (train) and which are scored (test);
/// under the overlapping scenario a site can appear in both.
struct HoldoutSplit {
  BivariateDataset train, test;
  std::vector<std::size_t> train_sites, test_sites;  // indices into the input dataset
};

HoldoutSplit make_holdout(const BivariateDataset& data, const HoldoutSpec& spec);

/// Keeps the ceil(n * fraction) sites with the largest value of response
/// `order_by` (0 or 1), in their original order.
BivariateDataset biased_pair_sample(const BivariateDataset& data, double fraction, int order_by);

}  // namespace prefsamp
