#include "prefsamp/gp.hpp"

#include <cmath>
#include <numbers>

#include "prefsamp/error.hpp"

namespace prefsamp {

GpPrior::GpPrior(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params)
    : grid_(std::move(grid)), params_(params) {
  if (!grid_) throw InvalidArgument("GP prior needs a grid");
  factor_ = cov_matrix(params_, grid_->centroids());
}

Eigen::VectorXd GpPrior::draw(Rng& rng) const {
  Eigen::VectorXd z(factor_.lower.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return factor_.lower.triangularView<Eigen::Lower>() * z;
}

double GpPrior::log_density(const Eigen::VectorXd& values) const {
  return gaussian_log_density(factor_.lower, values);
}

double gaussian_log_density(const Eigen::MatrixXd& lower, const Eigen::VectorXd& v) {
  Eigen::VectorXd z = lower.triangularView<Eigen::Lower>().solve(v);
  const double n = static_cast<double>(v.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - lower.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

GpField simulate_gp(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params, Rng& rng) {
  GpPrior prior(grid, params);
  return GpField{std::move(grid), prior.draw(rng), params};
}

GpField simulate_gp(std::shared_ptr<const GridApprox> grid, const ExpKernelParams& params, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_gp(std::move(grid), params, rng);
}

double eval_field(const GpField& field, const Location& s) {
  if (!field.grid) throw InvalidArgument("field has no grid");
  return field.values[static_cast<Eigen::Index>(field.grid->nearest_centroid(s))];
}

}  // namespace prefsamp
