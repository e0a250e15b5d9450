#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "prefsamp/covariance.hpp"
#include "prefsamp/lgcp.hpp"
#include "prefsamp/model.hpp"

// Independent reference computations shared by the unit and acceptance tests.
namespace oracles {

using namespace prefsamp;

// Independent cell-sum oracle for the grid-approximated log-likelihood.
inline double lgcp_cell_sum(const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta, const CovariateProvider& cov,
                          const std::vector<Location>& pts, const GridApprox& g) {
  double ll = 0.0;
  for (const auto& s : pts) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double d = std::hypot(s.x - g.centroid(c).x, s.y - g.centroid(c).y);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    ll += cov.at(s).dot(alpha) + eta[static_cast<Eigen::Index>(best)];
  }
  for (std::size_t c = 0; c < g.size(); ++c)
    ll -= g.cell_area() * std::exp(cov.at(g.centroid(c)).dot(alpha) + eta[static_cast<Eigen::Index>(c)]);
  return ll;
}


inline BivariateDataset random_dataset(std::size_t n, std::uint64_t seed, bool full = true) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  BivariateDataset d;
  d.covariates = CoordinateCovariates::intercept_and_y();
  for (std::size_t i = 0; i < n; ++i) {
    d.sites.push_back({u(g), u(g)});
    d.y1.push_back(z(g));
    d.y2.push_back(z(g));
    d.obs1.push_back(1);
    d.obs2.push_back(full || i % 3 != 0 ? 1 : 0);
    if (!d.obs2.back()) d.y2.back() = std::numeric_limits<double>::quiet_NaN();
  }
  return d;
}

inline ParamState random_state(const ModelSpec& spec, std::size_t cells, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  ParamState s = ParamState::initial(spec, cells, 2, 2, Priors{});
  const auto k = static_cast<Eigen::Index>(cells);
  for (auto& l : s.lgcp) {
    l.alpha = Eigen::Vector2d(5.0 + z(g), z(g));
    l.kernel = {u(g) / 3.0, u(g)};
    l.eta = Eigen::VectorXd::NullaryExpr(k, [&] { return 0.5 * z(g); });
  }
  s.beta1 = Eigen::Vector2d(z(g), z(g));
  s.beta2 = Eigen::Vector2d(z(g), z(g));
  const FamilyTraits t = traits(spec.family);
  if (t.shared_process) s.ps = {z(g), t.bivariate ? z(g) : 0.0};
  if (t.coreg) s.coreg = {u(g), t.bivariate ? z(g) : 0.0, t.bivariate ? u(g) : 0.0};
  s.phi_w1 = u(g);
  s.phi_w2 = u(g);
  s.tau1_2 = u(g) / 4.0;
  s.tau2_2 = u(g) / 4.0;
  s.w1 = Eigen::VectorXd::NullaryExpr(k, [&] { return z(g); });
  s.w2 = Eigen::VectorXd::NullaryExpr(k, [&] { return z(g); });
  return s;
}

// Dense bivariate MVN log density built from the cross-covariance formula.
inline double dense_mvn_loglik(const ParamState& s, const BivariateDataset& d) {
  std::vector<std::pair<int, std::size_t>> obs;
  for (int j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.observed(j, i)) obs.push_back({j, i});
  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd c(n, n);
  Eigen::VectorXd r(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto [ja, ia] = obs[static_cast<std::size_t>(a)];
    const Eigen::VectorXd x = d.covariates->at(d.sites[ia]);
    r[a] = d.y(ja, ia) - x.dot(ja == 0 ? s.beta1 : s.beta2);
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto [jb, ib] = obs[static_cast<std::size_t>(b)];
      const Eigen::Matrix2d m = cross_cov_m4(s.ps, s.coreg, s.lgcp[0].kernel, s.w1_kernel(), s.w2_kernel(),
                                             distance(d.sites[ia], d.sites[ib]));
      c(a, b) = m(ja, jb) + (a == b ? s.tau2(ja) : 0.0);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * r;
  double ll = -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  for (Eigen::Index i = 0; i < n; ++i) ll -= 0.5 * (std::log(es.eigenvalues()[i]) + proj[i] * proj[i] / es.eigenvalues()[i]);
  return ll;
}

}  // namespace oracles
