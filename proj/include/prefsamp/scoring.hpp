#pragma once

#include <span>

#include "prefsamp/model.hpp"
#include "prefsamp/predict.hpp"

namespace prefsamp {

double rmse(std::span<const double> pred, std::span<const double> truth);

/// (1/M) sum |x_m - y| - (1/(2 M^2)) sum_m sum_m' |x_m - x_m'|
double crps_empirical(std::span<const double> draws, double truth);

/// Closed-form CRPS of N(mu, sigma^2) at y.
double crps_gaussian(double mu, double sigma, double y);

struct ScoreReport {
  double rmse1 = 0.0, rmse2 = 0.0, rmse_sum = 0.0;
  double crps1 = 0.0, crps2 = 0.0, crps_sum = 0.0;
  std::size_t n1 = 0, n2 = 0;
};

/// Scores predictions of each response at the test sites where that
/// response is marked observed.
ScoreReport score(const PredictiveDraws& pred, const BivariateDataset& test);

}  // namespace prefsamp
