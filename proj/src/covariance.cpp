#include "prefsamp/covariance.hpp"

#include <cmath>
#include <sstream>

#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

void ExpKernelParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("kernel sigma2 must be positive");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw InvalidArgument("kernel phi must be positive");
}

double exp_cov(const ExpKernelParams& params, double h) {
  if (h < 0.0) throw InvalidArgument("negative distance");
  params.validate();
  return params.sigma2 * std::exp(-params.phi * h);
}

Eigen::MatrixXd distance_matrix(std::span<const Location> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) d(i, j) = d(j, i) = distance(pts[i], pts[j]);
  }
  return d;
}

Eigen::MatrixXd distance_matrix(std::span<const Location> a, std::span<const Location> b) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, j) = distance(a[i], b[j]);
  return d;
}

CovFactor factor_with_jitter(Eigen::MatrixXd cov, double jitter, JitterPolicy policy, double scale) {
  if (jitter < 0.0) throw InvalidArgument("jitter must be non-negative");
  const Eigen::Index n = cov.rows();
  auto attempt = [&](double j, CovFactor& out) {
    Eigen::MatrixXd m = cov;
    m.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    Eigen::MatrixXd l = llt.matrixL();
    if (!l.diagonal().allFinite() || (l.diagonal().array() <= 0.0).any()) return false;
    out.cov = std::move(m);
    out.lower = std::move(l);
    out.jitter = j;
    return true;
  };

  CovFactor out;
  if (attempt(jitter, out)) return out;
  double last = jitter;
  if (policy == JitterPolicy::Escalate && n > 0) {
    for (double extra = 1e-10 * scale; extra <= 1e-4 * scale * (1 + 1e-12); extra *= 10.0) {
      last = jitter + extra;
      if (attempt(last, out)) return out;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed (n=" << n << ", final jitter " << last << ")";
  throw FactorizationError(msg.str(), last);
}

CovFactor cov_matrix_from_distances(const ExpKernelParams& params, const Eigen::MatrixXd& dist, double jitter,
                                    JitterPolicy policy) {
  params.validate();
  Eigen::MatrixXd cov(dist.rows(), dist.cols());
  // Column-major storage: each column is contiguous, so fill per column.
  for (Eigen::Index j = 0; j < dist.cols(); ++j)
    kernels::exp_decay(params.sigma2, params.phi, {dist.col(j).data(), static_cast<std::size_t>(dist.rows())},
                       {cov.col(j).data(), static_cast<std::size_t>(cov.rows())});
  return factor_with_jitter(std::move(cov), jitter, policy, params.sigma2);
}

CovFactor cov_matrix(const ExpKernelParams& params, std::span<const Location> pts, double jitter,
                     JitterPolicy policy) {
  if (pts.empty()) throw InvalidArgument("covariance matrix needs at least one point");
  return cov_matrix_from_distances(params, distance_matrix(pts), jitter, policy);
}

CrossCovParts cross_cov_parts(const PSCoef& ps, const CoregCoef& coreg, const ExpKernelParams& eta,
                              const ExpKernelParams& w1, const ExpKernelParams& w2, double h) {
  const double ce = exp_cov(eta, h);
  const double c1 = exp_cov(w1, h);
  const double c2 = exp_cov(w2, h);
  CrossCovParts out;
  out.shared << ps.gamma1 * ps.gamma1, ps.gamma1 * ps.gamma2, ps.gamma1 * ps.gamma2, ps.gamma2 * ps.gamma2;
  out.shared *= ce;
  out.coreg << c1 * coreg.a11 * coreg.a11, c1 * coreg.a11 * coreg.a21, c1 * coreg.a11 * coreg.a21,
      c1 * coreg.a21 * coreg.a21 + c2 * coreg.a22 * coreg.a22;
  return out;
}

Eigen::Matrix2d cross_cov_m4(const PSCoef& ps, const CoregCoef& coreg, const ExpKernelParams& eta,
                             const ExpKernelParams& w1, const ExpKernelParams& w2, double h) {
  return cross_cov_parts(ps, coreg, eta, w1, w2, h).total();
}

LocalDependence local_cov_corr(const PSCoef& ps, const CoregCoef& coreg, double eta_sigma2, double w1_sigma2,
                               double w2_sigma2, bool include_nugget, double tau1_2, double tau2_2) {
  if (!(eta_sigma2 > 0.0) || !(w1_sigma2 > 0.0) || !(w2_sigma2 > 0.0))
    throw InvalidArgument("process variances must be positive");
  if (include_nugget && (!(tau1_2 > 0.0) || !(tau2_2 > 0.0)))
    throw InvalidArgument("nugget variances must be positive");
  LocalDependence out;
  out.cov = ps.gamma1 * ps.gamma2 * eta_sigma2 + coreg.a11 * coreg.a21 * w1_sigma2;
  out.var1 = ps.gamma1 * ps.gamma1 * eta_sigma2 + coreg.a11 * coreg.a11 * w1_sigma2;
  out.var2 = ps.gamma2 * ps.gamma2 * eta_sigma2 + coreg.a21 * coreg.a21 * w1_sigma2 +
             coreg.a22 * coreg.a22 * w2_sigma2;
  if (include_nugget) {
    out.var1 += tau1_2;
    out.var2 += tau2_2;
  }
  // A zero marginal forces a zero covariance; report zero correlation.
  out.corr = (out.var1 > 0.0 && out.var2 > 0.0) ? out.cov / std::sqrt(out.var1 * out.var2) : 0.0;
  return out;
}

}  // namespace prefsamp
