#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "prefsamp/covariance.hpp"
#include "prefsamp/grid.hpp"
#include "prefsamp/rng.hpp"

namespace prefsamp {

/// A latent Gaussian field realized at the grid centroids.
struct GpField {
  std::shared_ptr<const GridApprox> grid;
  Eigen::VectorXd values;
  ExpKernelParams params;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Zero-mean GP prior at the centroids with a cached Cholesky factor.
class GpPrior {
 public:
  GpPrior(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params);

  const GridApprox& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const GridApprox>& grid_ptr() const noexcept { return grid_; }
  const ExpKernelParams& params() const noexcept { return params_; }
  const CovFactor& factor() const noexcept { return factor_; }

  /// L z with z standard normal.
  Eigen::VectorXd draw(Rng& rng) const;
  /// Zero-mean Gaussian log density of a centroid vector.
  double log_density(const Eigen::VectorXd& values) const;

 private:
  std::shared_ptr<const GridApprox> grid_;
  ExpKernelParams params_;
  CovFactor factor_;
};

GpField simulate_gp(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params, Rng& rng);
GpField simulate_gp(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params, std::uint64_t seed);

/// Piecewise-constant evaluation: the value at the nearest centroid.
double eval_field(const GpField& field, const Location& s);

/// -0.5 n log(2 pi) - sum log L_ii - 0.5 |L^{-1} v|^2
double gaussian_log_density(const Eigen::MatrixXd& lower, const Eigen::VectorXd& v);

}  // namespace prefsamp
