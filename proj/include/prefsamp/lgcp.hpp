#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prefsamp/gp.hpp"
#include "prefsamp/grid.hpp"
#include "prefsamp/rng.hpp"

namespace prefsamp {

/// Supplies the covariate vector X(s) anywhere in the region.
class CovariateProvider {
 public:
  virtual ~CovariateProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual Eigen::VectorXd at(const Location& s) const = 0;
  virtual std::vector<std::string> names() const = 0;
};

/// Intercept plus optional centred coordinate terms, e.g. (1, s_y - 0.5).
class CoordinateCovariates final : public CovariateProvider {
 public:
  CoordinateCovariates(bool centered_x, bool centered_y, Location center = {0.5, 0.5});

  static std::shared_ptr<CoordinateCovariates> intercept_only();
  static std::shared_ptr<CoordinateCovariates> intercept_and_y();

  std::size_t dim() const override;
  Eigen::VectorXd at(const Location& s) const override;
  std::vector<std::string> names() const override;

  bool centered_x() const noexcept { return cx_; }
  bool centered_y() const noexcept { return cy_; }

 private:
  bool cx_, cy_;
  Location center_;
};

/// Covariates known at a set of sites, extended to the whole region by
/// nearest-site lookup. An intercept column is prepended.
class TableCovariates final : public CovariateProvider {
 public:
  TableCovariates(std::vector<Location> sites, Eigen::MatrixXd values, std::vector<std::string> names);

  std::size_t dim() const override { return static_cast<std::size_t>(values_.cols()) + 1; }
  Eigen::VectorXd at(const Location& s) const override;
  std::vector<std::string> names() const override;

 private:
  std::vector<Location> sites_;
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

Eigen::MatrixXd covariate_matrix(const CovariateProvider& covars, std::span<const Location> pts);

struct IntensityModel {
  Eigen::VectorXd alpha;
  GpField eta;
};

struct PointPattern {
  std::vector<Location> locations;
  Region region;

  std::size_t size() const noexcept { return locations.size(); }
};

/// X(s)^T alpha + eta(nearest centroid of s)
double log_intensity(const IntensityModel& m, const CovariateProvider& covars, const Location& s);

/// Grid-approximated LGCP log-likelihood:
/// sum_i log lambda(s_i) - cell_area * sum_c lambda(c).
double lgcp_loglik(const IntensityModel& m, const CovariateProvider& covars, const PointPattern& pattern,
                   const GridApprox& grid);

/// Lewis-Shedler thinning of a homogeneous Poisson(lambda_max * area)
/// proposal, lambda_max being the largest centroid intensity.
PointPattern simulate_lgcp(const IntensityModel& m, const CovariateProvider& covars, const GridApprox& grid,
                           Rng& rng);
PointPattern simulate_lgcp(const IntensityModel& m, const CovariateProvider& covars, const GridApprox& grid,
                           std::uint64_t seed);

/// Precomputed pieces of the LGCP log-likelihood for a fixed pattern, so
/// repeated evaluation costs O(cells) regardless of the point count.
class LgcpTerms {
 public:
  LgcpTerms(const CovariateProvider& covars, std::span<const Location> pattern, const GridApprox& grid);

  std::size_t cells() const noexcept { return static_cast<std::size_t>(cell_x_.rows()); }
  std::size_t points() const noexcept { return n_points_; }
  const Eigen::MatrixXd& cell_covariates() const noexcept { return cell_x_; }
  const Eigen::VectorXd& cell_counts() const noexcept { return counts_; }
  const Eigen::VectorXd& point_covariate_sum() const noexcept { return point_x_sum_; }
  double cell_area() const noexcept { return cell_area_; }

  double loglik(const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta) const;
  /// cell_x * alpha
  Eigen::VectorXd cell_offset(const Eigen::VectorXd& alpha) const { return cell_x_ * alpha; }

 private:
  Eigen::MatrixXd cell_x_;
  Eigen::VectorXd counts_;
  Eigen::VectorXd point_x_sum_;
  double cell_area_;
  std::size_t n_points_;
};

}  // namespace prefsamp
