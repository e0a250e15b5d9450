#include "prefsamp/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction and truth lengths differ");
  if (pred.empty()) throw InvalidArgument("empty test set");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double crps_empirical(std::span<const double> draws, double truth) {
  const std::size_t m = draws.size();
  if (m < 2) throw InvalidArgument("CRPS needs at least two draws");
  const double md = static_cast<double>(m);
  const double spread_to_truth = kernels::sum_abs_dev(draws, truth) / md;
  // sum_i sum_j |x_i - x_j| = 2 sum_i (2i - M - 1) x_(i) over the sorted sample.
  std::vector<double> s(draws.begin(), draws.end());
  std::sort(s.begin(), s.end());
  double pair = 0.0;
  for (std::size_t i = 0; i < m; ++i) pair += (2.0 * static_cast<double>(i + 1) - md - 1.0) * s[i];
  pair *= 2.0;
  return spread_to_truth - pair / (2.0 * md * md);
}

double crps_gaussian(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const double z = (y - mu) / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

ScoreReport score(const PredictiveDraws& pred, const BivariateDataset& test) {
  if (pred.sites.size() != test.size()) throw InvalidArgument("predictions do not match the test sites");
  ScoreReport r;
  for (int j = 0; j < pred.responses; ++j) {
    const Eigen::MatrixXd& v = pred.values[static_cast<std::size_t>(j)];
    const Eigen::VectorXd mean = pred.mean(j);
    std::vector<double> means, truths;
    double crps = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (!test.observed(j, i)) continue;
      means.push_back(mean[static_cast<Eigen::Index>(i)]);
      truths.push_back(test.y(j, i));
      const Eigen::VectorXd col = v.col(static_cast<Eigen::Index>(i));
      crps += crps_empirical({col.data(), static_cast<std::size_t>(col.size())}, test.y(j, i));
    }
    if (means.empty()) continue;
    const double e = rmse(means, truths);
    const double c = crps / static_cast<double>(means.size());
    if (j == 0) {
      r.rmse1 = e;
      r.crps1 = c;
      r.n1 = means.size();
    } else {
      r.rmse2 = e;
      r.crps2 = c;
      r.n2 = means.size();
    }
  }
  if (r.n1 + r.n2 == 0) throw InvalidArgument("empty test set");
  r.rmse_sum = r.rmse1 + r.rmse2;
  r.crps_sum = r.crps1 + r.crps2;
  return r;
}

}  // namespace prefsamp
