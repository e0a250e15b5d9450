#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "prefsamp/diagnostics.hpp"
#include "prefsamp/grid.hpp"
#include "prefsamp/mcmc.hpp"
#include "prefsamp/model.hpp"

namespace prefsamp {

/// How latent fields are evaluated at prediction sites.
enum class LatentAtSites {
  Kriged,   // Gaussian conditional given the grid values
  Nearest,  // value at the nearest centroid
};

struct PredictOptions {
  LatentAtSites latent = LatentAtSites::Kriged;
  bool observation_noise = true;
};

/// Posterior-predictive draws at a set of sites, rows = draws, cols = sites.
struct PredictiveDraws {
  std::vector<Location> sites;
  int responses = 2;
  std::array<Eigen::MatrixXd, 2> values;

  Eigen::VectorXd mean(int response) const;
  Eigen::VectorXd quantile(int response, double q) const;
};

/// Predicts both responses at every site of `test` (masks are ignored),
/// one draw per latent snapshot in `draws`.
PredictiveDraws predict_responses(const PosteriorDraws& draws, const BivariateDataset& test,
                                  std::shared_ptr<const GridApprox> grid, std::uint64_t seed,
                                  const PredictOptions& options = {});

struct Band {
  Eigen::VectorXd mean, lo, hi;  // pointwise mean and equal-tailed 95% limits
};

struct Interval {
  double mean = 0.0, lo = 0.0, hi = 0.0;
  bool covers(double v) const noexcept { return lo <= v && v <= hi; }
};

/// Posterior cross-covariance curves on a distance grid, split into the
/// shared-process and coregionalization parts of cov(Y1(s), Y2(s + h)).
struct DependenceSummary {
  std::vector<double> distances;
  Eigen::MatrixXd cov11, cov22, cov21, cov21_shared, cov21_corr;  // rows = draws, cols = distances
  Band cov11_band, cov22_band, cov21_band, cov21_shared_band, cov21_corr_band;
  Eigen::VectorXd local_cov, local_corr;  // per draw, at h = 0
  Interval local_cov_interval, local_corr_interval;
};

DependenceSummary dependence_summary(const PosteriorDraws& draws, std::vector<double> distances,
                                     bool include_nugget = false);

}  // namespace prefsamp
