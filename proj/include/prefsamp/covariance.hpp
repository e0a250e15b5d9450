#pragma once

#include <Eigen/Dense>
#include <span>

#include "prefsamp/grid.hpp"

namespace prefsamp {

/// Exponential kernel sigma2 * exp(-phi * h).
struct ExpKernelParams {
  double sigma2 = 1.0;
  double phi = 1.0;

  /// sigma2 * phi is the consistently estimable product.
  double identifiable() const noexcept { return sigma2 * phi; }
  void validate() const;
};

/// Lower-triangular coregionalization loadings; a11, a22 >= 0 by convention.
struct CoregCoef {
  double a11 = 0.0;
  double a21 = 0.0;
  double a22 = 0.0;
};

/// Loadings of each response on the shared sampling process.
struct PSCoef {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

double exp_cov(const ExpKernelParams& params, double h);

Eigen::MatrixXd distance_matrix(std::span<const Location> pts);
Eigen::MatrixXd distance_matrix(std::span<const Location> a, std::span<const Location> b);

enum class JitterPolicy {
  Fixed,     // factor with exactly the requested jitter
  Escalate,  // 1e-10 * sigma2, x10 per step, up to 1e-4 * sigma2
};

/// Dense covariance matrix together with its lower Cholesky factor.
struct CovFactor {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd lower;
  double jitter = 0.0;  // diagonal actually added
};

/// Factor a symmetric matrix, adding diagonal jitter per the policy.
/// `scale` sets the reference magnitude for escalated jitter.
CovFactor factor_with_jitter(Eigen::MatrixXd cov, double jitter, JitterPolicy policy, double scale);

CovFactor cov_matrix(const ExpKernelParams& params, std::span<const Location> pts, double jitter = 0.0,
                     JitterPolicy policy = JitterPolicy::Escalate);

/// Same as cov_matrix but from a precomputed distance matrix.
CovFactor cov_matrix_from_distances(const ExpKernelParams& params, const Eigen::MatrixXd& dist,
                                    double jitter = 0.0, JitterPolicy policy = JitterPolicy::Escalate);

/// Cross-covariance of (Y1, Y2) at separation h split by source.
struct CrossCovParts {
  Eigen::Matrix2d shared;  // c_eta(h) * gamma gamma^T
  Eigen::Matrix2d coreg;   // coregionalization contribution

  Eigen::Matrix2d total() const { return shared + coreg; }
};

CrossCovParts cross_cov_parts(const PSCoef& ps, const CoregCoef& coreg, const ExpKernelParams& eta,
                              const ExpKernelParams& w1, const ExpKernelParams& w2, double h);

/// Shared-process plus coregionalization cross-covariance matrix. With
/// gamma = 0 this is the pure coregionalization model; with a = 0 it is the
/// pure shared-process model.
Eigen::Matrix2d cross_cov_m4(const PSCoef& ps, const CoregCoef& coreg, const ExpKernelParams& eta,
                             const ExpKernelParams& w1, const ExpKernelParams& w2, double h);

struct LocalDependence {
  double cov = 0.0;
  double corr = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
};

/// Covariance and correlation of (Y1(s), Y2(s)) at a single location.
/// Marginal variances include the nuggets only when include_nugget is set.
LocalDependence local_cov_corr(const PSCoef& ps, const CoregCoef& coreg, double eta_sigma2, double w1_sigma2,
                               double w2_sigma2, bool include_nugget = false, double tau1_2 = 0.0,
                               double tau2_2 = 0.0);

}  // namespace prefsamp
