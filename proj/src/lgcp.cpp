#include "prefsamp/lgcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

CoordinateCovariates::CoordinateCovariates(bool centered_x, bool centered_y, Location center)
    : cx_(centered_x), cy_(centered_y), center_(center) {}

std::shared_ptr<CoordinateCovariates> CoordinateCovariates::intercept_only() {
  return std::make_shared<CoordinateCovariates>(false, false);
}

std::shared_ptr<CoordinateCovariates> CoordinateCovariates::intercept_and_y() {
  return std::make_shared<CoordinateCovariates>(false, true);
}

std::size_t CoordinateCovariates::dim() const { return 1 + (cx_ ? 1 : 0) + (cy_ ? 1 : 0); }

Eigen::VectorXd CoordinateCovariates::at(const Location& s) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
  Eigen::Index k = 0;
  x[k++] = 1.0;
  if (cx_) x[k++] = s.x - center_.x;
  if (cy_) x[k++] = s.y - center_.y;
  return x;
}

std::vector<std::string> CoordinateCovariates::names() const {
  std::vector<std::string> n{"intercept"};
  if (cx_) n.push_back("x_centered");
  if (cy_) n.push_back("y_centered");
  return n;
}

TableCovariates::TableCovariates(std::vector<Location> sites, Eigen::MatrixXd values, std::vector<std::string> names)
    : sites_(std::move(sites)), values_(std::move(values)), names_(std::move(names)) {
  if (sites_.empty()) throw InvalidArgument("covariate table is empty");
  if (static_cast<Eigen::Index>(sites_.size()) != values_.rows() ||
      static_cast<Eigen::Index>(names_.size()) != values_.cols())
    throw InvalidArgument("covariate table shape mismatch");
}

Eigen::VectorXd TableCovariates::at(const Location& s) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    double d = (sites_[i].x - s.x) * (sites_[i].x - s.x) + (sites_[i].y - s.y) * (sites_[i].y - s.y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  Eigen::VectorXd x(values_.cols() + 1);
  x[0] = 1.0;
  x.tail(values_.cols()) = values_.row(static_cast<Eigen::Index>(best)).transpose();
  return x;
}

std::vector<std::string> TableCovariates::names() const {
  std::vector<std::string> n{"intercept"};
  n.insert(n.end(), names_.begin(), names_.end());
  return n;
}

Eigen::MatrixXd covariate_matrix(const CovariateProvider& covars, std::span<const Location> pts) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(covars.dim()));
  for (std::size_t i = 0; i < pts.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = covars.at(pts[i]).transpose();
  return x;
}

namespace {

void check_alpha(const IntensityModel& m, const CovariateProvider& covars) {
  if (static_cast<std::size_t>(m.alpha.size()) != covars.dim())
    throw InvalidArgument("alpha length does not match covariate dimension");
  if (!m.eta.grid) throw InvalidArgument("intensity field has no grid");
}

}  // namespace

double log_intensity(const IntensityModel& m, const CovariateProvider& covars, const Location& s) {
  check_alpha(m, covars);
  return covars.at(s).dot(m.alpha) + eval_field(m.eta, s);
}

double lgcp_loglik(const IntensityModel& m, const CovariateProvider& covars, const PointPattern& pattern,
                   const GridApprox& grid) {
  check_alpha(m, covars);
  if (m.eta.size() != grid.size()) throw InvalidArgument("field size does not match grid");
  LgcpTerms terms(covars, pattern.locations, grid);
  return terms.loglik(m.alpha, m.eta.values);
}

PointPattern simulate_lgcp(const IntensityModel& m, const CovariateProvider& covars, const GridApprox& grid,
                           Rng& rng) {
  check_alpha(m, covars);
  if (m.eta.size() != grid.size()) throw InvalidArgument("field size does not match grid");
  const Region& region = grid.region();

  Eigen::VectorXd log_lambda = covariate_matrix(covars, grid.centroids()) * m.alpha + m.eta.values;
  for (Eigen::Index c = 0; c < log_lambda.size(); ++c)
    if (std::isnan(log_lambda[c]) || log_lambda[c] == std::numeric_limits<double>::infinity())
      throw NumericalError("non-finite intensity at centroid " + std::to_string(c));
  Eigen::VectorXd lambda = log_lambda.array().exp();
  const double lambda_max = lambda.maxCoeff();

  PointPattern out{{}, region};
  if (!(lambda_max > 0.0)) return out;
  if (!std::isfinite(lambda_max)) throw NumericalError("intensity overflow in thinning envelope");

  const std::uint64_t n = rng.poisson(lambda_max * region.area());
  out.locations.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    Location s{region.xmin() + rng.uniform_open() * region.width(),
               region.ymin() + rng.uniform_open() * region.height()};
    const double keep = lambda[static_cast<Eigen::Index>(grid.nearest_centroid(s))] / lambda_max;
    if (rng.uniform() < keep) out.locations.push_back(s);
  }
  return out;
}

PointPattern simulate_lgcp(const IntensityModel& m, const CovariateProvider& covars, const GridApprox& grid,
                           std::uint64_t seed) {
  Rng rng(seed);
  return simulate_lgcp(m, covars, grid, rng);
}

LgcpTerms::LgcpTerms(const CovariateProvider& covars, std::span<const Location> pattern, const GridApprox& grid)
    : cell_x_(covariate_matrix(covars, grid.centroids())),
      counts_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()))),
      point_x_sum_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(covars.dim()))),
      cell_area_(grid.cell_area()),
      n_points_(pattern.size()) {
  for (const auto& s : pattern) {
    counts_[static_cast<Eigen::Index>(grid.nearest_centroid(s))] += 1.0;
    point_x_sum_ += covars.at(s);
  }
}

double LgcpTerms::loglik(const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta) const {
  Eigen::VectorXd offset = cell_x_ * alpha;
  const auto k = static_cast<std::size_t>(offset.size());
  const double integral = cell_area_ * kernels::sum_exp2({offset.data(), k}, {eta.data(), k});
  const double points = point_x_sum_.dot(alpha) + kernels::dot({counts_.data(), k}, {eta.data(), k});
  const double ll = points - integral;
  if (!std::isfinite(ll)) throw NumericalError("non-finite LGCP log-likelihood (intensity overflow)");
  return ll;
}

}  // namespace prefsamp
