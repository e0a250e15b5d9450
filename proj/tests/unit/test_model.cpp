#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "prefsamp/covariance.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/gp.hpp"
#include "prefsamp/lgcp.hpp"
#include "prefsamp/model.hpp"
#include "oracles.hpp"

using namespace prefsamp;

namespace {

double normal_ll(double y, double mean, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * (y - mean) * (y - mean) / var;
}

}  // namespace

TEST_CASE("family traits and validation") {
  CHECK(traits(ModelFamily::M1).shared_process == false);
  CHECK(traits(ModelFamily::M2).shared_process == true);
  CHECK(traits(ModelFamily::M3).coreg == true);
  CHECK(traits(ModelFamily::M4).coreg == true);
  CHECK(traits(ModelFamily::M4).shared_process == true);
  CHECK(traits(ModelFamily::M1Star).coreg == traits(ModelFamily::M3).coreg);
  CHECK(traits(ModelFamily::M1Star).shared_process == traits(ModelFamily::M3).shared_process);
  CHECK(traits(ModelFamily::Uni2).bivariate == false);
  CHECK(parse_family("m4") == ModelFamily::M4);
  CHECK(parse_family("M2star") == ModelFamily::M2Star);
  CHECK_THROWS_AS(parse_family("M5"), InvalidArgument);

  CHECK_THROWS_AS((ModelSpec{ModelFamily::M2, Scenario::Disjoint, true, {}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((ModelSpec{ModelFamily::M1Star, Scenario::Shared, true, {}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((ModelSpec{ModelFamily::M2, Scenario::Shared, true, {{"beta", 1.0}}}.validate()), InvalidArgument);
  CHECK_NOTHROW((ModelSpec{ModelFamily::M2Star, Scenario::Disjoint, true, {}}.validate()));
}

TEST_CASE("default priors") {
  const Priors p = priors_default();
  CHECK(p.alpha_var == 100.0);
  CHECK(p.beta_var == 100.0);
  CHECK(p.gamma_var == 100.0);
  CHECK(p.sigma2_shape == 2.0);
  CHECK(p.sigma2_rate == 0.1);
  CHECK(p.phi_min == 0.0);
  CHECK(p.phi_max == 100.0);
  CHECK(p.tau2_shape == 2.0);
  CHECK(p.tau2_rate == 0.1);
  CHECK(std::exp(normal_logpdf(0.0, 0.0, p.gamma_var)) == doctest::Approx(1.0 / std::sqrt(200.0 * M_PI)));
  CHECK(p.tau2_rate / (p.tau2_shape - 1.0) == doctest::Approx(0.1));
  CHECK(std::isinf(uniform_logpdf(100.5, p.phi_min, p.phi_max)));
  CHECK(uniform_logpdf(50.0, p.phi_min, p.phi_max) == doctest::Approx(-std::log(100.0)));
  // IG(2, 0.1) density at 0.1: 0.1^2 / Gamma(2) * 0.1^-3 * exp(-1)
  CHECK(inv_gamma_logpdf(0.1, 2.0, 0.1) == doctest::Approx(std::log(0.01 * 1000.0 * std::exp(-1.0))));
}

TEST_CASE("single-observation response likelihood") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 2));
  BivariateDataset d;
  d.covariates = CoordinateCovariates::intercept_only();
  d.sites = {{0.3, 0.3}};
  d.y1 = {0.0};
  d.y2 = {std::numeric_limits<double>::quiet_NaN()};
  d.obs1 = {1};
  d.obs2 = {0};
  const ModelSpec spec{ModelFamily::Uni1, Scenario::Shared, true, {}};
  ParamState s = ParamState::initial(spec, grid->size(), 1, 1, Priors{});
  s.tau1_2 = 1.0;
  CHECK(response_loglik(spec, s, d, grid) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
  s.tau1_2 = 0.0;
  CHECK_THROWS_AS(response_loglik(spec, s, d, grid), InvalidArgument);
}

TEST_CASE("nesting of the response likelihood") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 4));
  const BivariateDataset d = oracles::random_dataset(12, 1);
  const ModelSpec m1{ModelFamily::M1, Scenario::Shared, true, {}}, m2{ModelFamily::M2, Scenario::Shared, true, {}};
  const ModelSpec m3{ModelFamily::M3, Scenario::Shared, true, {}}, m4{ModelFamily::M4, Scenario::Shared, true, {}};
  ParamState s = oracles::random_state(m4, grid->size(), 2);

  ParamState zero_eta = s;
  zero_eta.lgcp[0].eta.setZero();
  CHECK(response_loglik(m2, zero_eta, d, grid) == doctest::Approx(response_loglik(m1, zero_eta, d, grid)).epsilon(1e-12));
  ParamState zero_gamma = s;
  zero_gamma.ps = {0.0, 0.0};
  CHECK(std::abs(response_loglik(m2, zero_gamma, d, grid) - response_loglik(m1, zero_gamma, d, grid)) < 1e-10);
  CHECK(std::abs(response_loglik(m4, zero_gamma, d, grid) - response_loglik(m3, zero_gamma, d, grid)) < 1e-10);
  ParamState zero_a = s;
  zero_a.coreg = {0.0, 0.0, 0.0};
  CHECK(std::abs(response_loglik(m4, zero_a, d, grid) - response_loglik(m2, zero_a, d, grid)) < 1e-10);

  // Direct recomputation of the M4 conditional likelihood.
  double direct = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(grid->nearest_centroid(d.sites[i]));
    const Eigen::VectorXd x = d.covariates->at(d.sites[i]);
    const double m1v = x.dot(s.beta1) + s.ps.gamma1 * s.lgcp[0].eta[c] + s.coreg.a11 * s.w1[c];
    const double m2v = x.dot(s.beta2) + s.ps.gamma2 * s.lgcp[0].eta[c] + s.coreg.a21 * s.w1[c] + s.coreg.a22 * s.w2[c];
    direct += normal_ll(d.y1[i], m1v, s.tau1_2) + normal_ll(d.y2[i], m2v, s.tau2_2);
  }
  CHECK(response_loglik(m4, s, d, grid) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("overlapping with full masks equals shared locations") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 5));
  const BivariateDataset d = oracles::random_dataset(15, 3);
  for (ModelFamily f : {ModelFamily::M1, ModelFamily::M2, ModelFamily::M3, ModelFamily::M4}) {
    const ModelSpec shared{f, Scenario::Shared, true, {}}, over{f, Scenario::Overlapping, true, {}};
    const ParamState s = oracles::random_state(shared, grid->size(), 4);
    CHECK(joint_log_posterior(shared, s, d, grid, Priors{}) == joint_log_posterior(over, s, d, grid, Priors{}));
  }
}

TEST_CASE("univariate models equal bivariate ones with the second response masked") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 4));
  BivariateDataset d = oracles::random_dataset(10, 5);
  const std::pair<ModelFamily, ModelFamily> pairs[] = {{ModelFamily::Uni1, ModelFamily::M1},
                                                       {ModelFamily::Uni2, ModelFamily::M2},
                                                       {ModelFamily::Uni3, ModelFamily::M3},
                                                       {ModelFamily::Uni4, ModelFamily::M4}};
  BivariateDataset masked = d;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    masked.obs2[i] = 0;
    masked.y2[i] = std::numeric_limits<double>::quiet_NaN();
  }
  for (auto [uni, bi] : pairs) {
    const ModelSpec su{uni, Scenario::Shared, true, {}}, sb{bi, Scenario::Overlapping, true, {}};
    ParamState s = oracles::random_state(sb, grid->size(), 6);
    s.ps.gamma2 = 0.0;
    s.coreg.a21 = 0.0;
    s.coreg.a22 = 0.0;
    CHECK(std::abs(response_loglik(su, s, d, grid) - response_loglik(sb, s, masked, grid)) < 1e-10);
  }
}

TEST_CASE("marginal response likelihood matches the dense bivariate MVN oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const BivariateDataset d = oracles::random_dataset(n, 100 + seed, seed % 2 == 0);
    for (ModelFamily f : {ModelFamily::M1, ModelFamily::M2, ModelFamily::M3, ModelFamily::M4}) {
      const ModelSpec spec{f, seed % 2 == 0 ? Scenario::Shared : Scenario::Overlapping, true, {}};
      ParamState s = oracles::random_state(spec, 1, 200 + seed);
      CAPTURE(seed);
      CAPTURE(to_string(f));
      CHECK(std::abs(marginal_response_loglik(spec, s, d) - oracles::dense_mvn_loglik(s, d)) < 1e-6);
    }
  }
}

TEST_CASE("joint posterior is the sum of independently recomputed terms") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 3));
  const BivariateDataset d = oracles::random_dataset(3, 7);
  const ModelSpec spec{ModelFamily::M4, Scenario::Shared, true, {}};
  const ParamState s = oracles::random_state(spec, grid->size(), 8);
  const Priors p;

  const IntensityModel im{s.lgcp[0].alpha, GpField{grid, s.lgcp[0].eta, s.lgcp[0].kernel}};
  const PointPattern pat{d.sites, d.region};
  const double lgcp = lgcp_loglik(im, *d.covariates, pat, *grid);
  const double resp = response_loglik(spec, s, d, grid);
  auto prior_density = [&](const ExpKernelParams& k, const Eigen::VectorXd& v) {
    const auto c = grid->centroids();
    Eigen::MatrixXd cov(9, 9);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) cov(i, j) = exp_cov(k, distance(c[i], c[j]));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * v;
    double ll = -4.5 * std::log(2.0 * M_PI);
    for (int i = 0; i < 9; ++i) ll -= 0.5 * (std::log(es.eigenvalues()[i]) + proj[i] * proj[i] / es.eigenvalues()[i]);
    return ll;
  };
  const double latent = prior_density(s.lgcp[0].kernel, s.lgcp[0].eta) + prior_density(s.w1_kernel(), s.w1) +
                        prior_density(s.w2_kernel(), s.w2);
  double prior = 0.0;
  for (int i = 0; i < 2; ++i) {
    prior += normal_logpdf(s.lgcp[0].alpha[i], 0, 100) + normal_logpdf(s.beta1[i], 0, 100) +
             normal_logpdf(s.beta2[i], 0, 100);
  }
  prior += inv_gamma_logpdf(s.lgcp[0].kernel.sigma2, 2, 0.1) - 3.0 * std::log(100.0);
  prior += normal_logpdf(s.ps.gamma1, 0, 100) + normal_logpdf(s.ps.gamma2, 0, 100);
  prior += normal_logpdf(s.coreg.a11, 0, 100) + normal_logpdf(s.coreg.a21, 0, 100) + normal_logpdf(s.coreg.a22, 0, 100);
  prior += inv_gamma_logpdf(s.tau1_2, 2, 0.1) + inv_gamma_logpdf(s.tau2_2, 2, 0.1);

  const double total = joint_log_posterior(spec, s, d, grid, p);
  CHECK(total == doctest::Approx(lgcp + resp + latent + prior).epsilon(1e-9));
}

TEST_CASE("M3 responses are separable from the LGCP field") {
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), 4));
  const BivariateDataset d = oracles::random_dataset(8, 9);
  const ModelSpec spec{ModelFamily::M3, Scenario::Shared, true, {}};
  const ParamState a = oracles::random_state(spec, grid->size(), 10);
  ParamState b = a;
  b.lgcp[0].eta *= -0.5;
  ModelData md(spec, d, grid);
  const PosteriorTerms ta = posterior_terms(md, a, Priors{}), tb = posterior_terms(md, b, Priors{});
  CHECK(ta.response == tb.response);
  CHECK((ta.total() - tb.total()) == doctest::Approx((ta.lgcp + ta.latent) - (tb.lgcp + tb.latent)).epsilon(1e-12));
}

TEST_CASE("dataset validation") {
  BivariateDataset d = oracles::random_dataset(4, 11);
  CHECK_NOTHROW(d.validate_for(Scenario::Shared));
  d.obs2[1] = 0;
  d.y2[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(d.validate_for(Scenario::Shared), InvalidArgument);
  CHECK_NOTHROW(d.validate_for(Scenario::Overlapping));
  CHECK_THROWS_AS(d.validate_for(Scenario::Disjoint), InvalidArgument);
  d.y1.pop_back();
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}
