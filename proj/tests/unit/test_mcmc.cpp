#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "prefsamp/adaptive.hpp"
#include "prefsamp/diagnostics.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/lgcp.hpp"
#include "prefsamp/mcmc.hpp"
#include "stats.hpp"

using namespace prefsamp;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

BivariateDataset white_noise_dataset(std::size_t n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  BivariateDataset d;
  d.covariates = CoordinateCovariates::intercept_only();
  for (std::size_t i = 0; i < n; ++i) {
    d.sites.push_back({rng.uniform_open(), rng.uniform_open()});
    d.y1.push_back(1.0 + sd * rng.normal());
    d.y2.push_back(-1.0 + sd * rng.normal());
    d.obs1.push_back(1);
    d.obs2.push_back(1);
  }
  return d;
}

}  // namespace

TEST_CASE("ESS of an iid sequence") {
  Rng rng(1);
  std::vector<double> x(20000);
  for (auto& v : x) v = rng.normal();
  const double ess = effective_sample_size(x);
  CHECK(ess >= 16000.0);
  CHECK(ess <= 24000.0);
  CHECK(std::isnan(effective_sample_size(std::vector<double>(100, 2.0))));
}

TEST_CASE("ESS of an AR(1) sequence is near its theoretical value") {
  Rng rng(2);
  const double rho = 0.9;
  std::vector<double> x(100000);
  double v = 0.0;
  for (auto& e : x) e = v = rho * v + std::sqrt(1 - rho * rho) * rng.normal();
  const double expected = 100000.0 * (1 - rho) / (1 + rho);
  CHECK(effective_sample_size(x) == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("quantiles and summaries") {
  const std::vector<double> x{4.0, 1.0, 3.0, 2.0, 5.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 0.5) == 3.0);
  CHECK(quantile(x, 0.25) == 2.0);
  CHECK(quantile(x, 0.1) == doctest::Approx(1.4));
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), InvalidArgument);
  const Summary s = summarize(x);
  CHECK(s.mean == 3.0);
  CHECK(s.covers(3.0));
}

TEST_CASE("elliptical slice with a flat likelihood recovers the prior") {
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 3));
  const CovFactor f = cov_matrix({1.0, 2.0}, g->centroids());
  Rng rng(3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
  const FieldLogLik flat = [](const Eigen::VectorXd&) { return 0.0; };
  std::vector<double> at4;
  for (int i = 0; i < 10000; ++i) {
    x = ess_update_field(x, flat, f.lower, rng);
    at4.push_back(x[4]);
  }
  CHECK(std::abs(teststats::variance(at4) - 1.0) < 0.05);
}

TEST_CASE("elliptical slice with a vanishing prior is pinned") {
  const Eigen::MatrixXd l = Eigen::MatrixXd::Identity(4, 4) * 1e-10;
  Rng rng(4);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  const FieldLogLik ll = [](const Eigen::VectorXd& v) { return -0.5 * (v.array() - 1.0).square().sum(); };
  for (int i = 0; i < 100; ++i) x = ess_update_field(x, ll, l, rng);
  CHECK(x.cwiseAbs().maxCoeff() < 1e-9);
  const FieldLogLik bad = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(ess_update_field(x, bad, l, rng), NumericalError);
}

TEST_CASE("elliptical slice on a one-cell conjugate model") {
  // prior f ~ N(0, s2); observation y ~ N(f, v).
  const double s2 = 2.0, v = 0.5, y = 1.3;
  const double post_var = 1.0 / (1.0 / s2 + 1.0 / v), post_mean = post_var * y / v;
  const Eigen::MatrixXd l = Eigen::MatrixXd::Constant(1, 1, std::sqrt(s2));
  const FieldLogLik ll = [&](const Eigen::VectorXd& f) { return -0.5 * (y - f[0]) * (y - f[0]) / v; };
  Rng rng(5);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  std::vector<double> draws, sq;
  for (int i = 0; i < 10000; ++i) {
    x = ess_update_field(x, ll, l, rng);
    draws.push_back(x[0]);
    sq.push_back((x[0] - post_mean) * (x[0] - post_mean));
  }
  CHECK(std::abs(teststats::mean(draws) - post_mean) < 3.0 * teststats::batch_se(draws));
  CHECK(std::abs(teststats::mean(sq) - post_var) < 3.0 * teststats::batch_se(sq));
}

TEST_CASE("hyperparameter moves with a flat likelihood recover the priors") {
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 2));
  const Eigen::MatrixXd dist = distance_matrix(g->centroids());
  CorrelationFactor cur(&dist), scr(&dist);
  Priors p;
  AdaptiveProposal whitened(Eigen::VectorXd::Constant(2, 1.0)), centered(Eigen::VectorXd::Constant(1, 1.0));
  const FieldLogLik flat = [](const Eigen::VectorXd&) { return 0.0; };
  Rng rng(6);
  ExpKernelParams k{0.1, 3.0};
  Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
  std::vector<double> phi, sigma2, std_eta;
  const int burn = 5000, thin = 20, keep = 10000;
  for (int it = 0; it < burn + thin * keep; ++it) {
    if (it == burn) {
      whitened.freeze();
      centered.freeze();
    }
    f = ess_update_field(f, flat, cur.lower(k.phi), rng, std::sqrt(k.sigma2));
    HyperMove hm = update_hyperparams(k, f, flat, p, true, whitened, cur, scr, rng);
    if (hm.accepted) {
      k = hm.params;
      f = hm.field;
    }
    k = update_hyperparams_centered(k, f, p, true, centered, cur, scr, rng).params;
    if (it >= burn && (it - burn) % thin == thin - 1) {
      phi.push_back(k.phi);
      sigma2.push_back(k.sigma2);
      std_eta.push_back(f[2] / std::sqrt(k.sigma2));
    }
  }
  const double p_phi = teststats::ks_pvalue(phi, [](double x) { return x / 100.0; });
  const double p_s2 = teststats::ks_pvalue(sigma2, [](double x) { return boost::math::gamma_q(2.0, 0.1 / x); });
  const double p_eta = teststats::ks_pvalue(std_eta, normal_cdf);
  CAPTURE(p_phi);
  CAPTURE(p_s2);
  CAPTURE(p_eta);
  CHECK(p_phi > 0.001);
  CHECK(p_s2 > 0.001);
  CHECK(p_eta > 0.001);
}

TEST_CASE("zero step size keeps hyperparameters fixed") {
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 2));
  const Eigen::MatrixXd dist = distance_matrix(g->centroids());
  CorrelationFactor cur(&dist), scr(&dist);
  AdaptiveProposal zero(Eigen::VectorXd::Zero(2));
  Rng rng(7);
  const FieldLogLik flat = [](const Eigen::VectorXd&) { return 0.0; };
  const ExpKernelParams k{0.2, 4.0};
  Eigen::VectorXd f = Eigen::VectorXd::Constant(4, 0.1);
  for (int i = 0; i < 50; ++i) {
    const HyperMove hm = update_hyperparams(k, f, flat, Priors{}, true, zero, cur, scr, rng);
    CHECK_FALSE(hm.accepted);
    CHECK(hm.params.sigma2 == k.sigma2);
    CHECK(hm.params.phi == k.phi);
    CHECK(hm.field == f);
  }
}

TEST_CASE("adaptive proposal reaches the target acceptance on a Gaussian target") {
  AdaptiveProposal prop(Eigen::VectorXd::Constant(2, 5.0), 0.3);
  Rng rng(8);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  auto lp = [](const Eigen::VectorXd& v) { return -0.5 * (v[0] * v[0] + 4.0 * v[1] * v[1]); };
  for (int i = 0; i < 5000; ++i) {
    const Eigen::VectorXd y = prop.propose(x, rng);
    const bool acc = std::log(rng.uniform_open()) < lp(y) - lp(x);
    if (acc) x = y;
    prop.count(acc);
    prop.adapt(acc, x);
  }
  prop.freeze();
  prop.reset_counts();
  for (int i = 0; i < 5000; ++i) {
    const Eigen::VectorXd y = prop.propose(x, rng);
    const bool acc = std::log(rng.uniform_open()) < lp(y) - lp(x);
    if (acc) x = y;
    prop.count(acc);
  }
  CHECK(prop.acceptance_rate() > 0.2);
  CHECK(prop.acceptance_rate() < 0.45);
}

TEST_CASE("Gibbs linear block") {
  Rng rng(9);
  SUBCASE("no data gives the prior") {
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i)
      draws.push_back(gibbs_linear_block(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), 1.0, Eigen::VectorXd::Constant(1, 100.0), rng)[0]);
    CHECK(std::abs(teststats::mean(draws)) < 4.0 * 10.0 / std::sqrt(20000.0));
    CHECK(teststats::variance(draws) == doctest::Approx(100.0).epsilon(0.05));
  }
  SUBCASE("strong data recovers OLS") {
    const int n = 10000;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = rng.normal();
      x(i, 2) = rng.uniform();
      y[i] = 0.5 - 2.0 * x(i, 1) + 3.0 * x(i, 2) + 0.1 * rng.normal();
    }
    const Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    const int reps = 200;
    for (int r = 0; r < reps; ++r) mean += gibbs_linear_block(x, y, 0.01, Eigen::VectorXd::Constant(3, 100.0), rng);
    mean /= reps;
    CHECK((mean - ols).cwiseAbs().maxCoeff() < 1e-3);
  }
  SUBCASE("tau2 conditional is IG(2 + n/2, 0.1 + SSR/2)") {
    const double ssr = 12.0;
    const std::size_t n = 30;
    std::vector<double> draws;
    for (int i = 0; i < 50000; ++i) draws.push_back(draw_tau2(ssr, n, 2.0, 0.1, rng));
    const double shape = 2.0 + 15.0, rate = 0.1 + 6.0;
    const double m = rate / (shape - 1.0), sd = m / std::sqrt(shape - 2.0);
    CHECK(std::abs(teststats::mean(draws) - m) < 4.0 * sd / std::sqrt(50000.0));
    const double p = teststats::ks_pvalue(draws, [&](double x) { return boost::math::gamma_q(shape, rate / x); });
    CHECK(p > 0.001);
  }
}

TEST_CASE("joint samplers recover an analytic two-cell posterior") {
  // y_i = beta + f[c_i] + e_i, f ~ N(0, K) on two cells, beta ~ N(0, 100), tau2 known.
  const double tau2 = 0.4;
  Eigen::Matrix2d k;
  k << 1.0, 0.5, 0.5, 1.0;
  const Eigen::Matrix2d lk = k.llt().matrixL();
  const std::vector<int> cell{0, 0, 1, 1, 1};
  const Eigen::VectorXd y = (Eigen::VectorXd(5) << 1.2, 0.7, -0.4, 0.1, -0.9).finished();

  // Analytic joint posterior over theta = (beta, f0, f1).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 3);
  for (int i = 0; i < 5; ++i) {
    a(i, 0) = 1.0;
    a(i, 1 + cell[i]) = 1.0;
  }
  Eigen::Matrix3d prior_prec = Eigen::Matrix3d::Zero();
  prior_prec(0, 0) = 1.0 / 100.0;
  prior_prec.block<2, 2>(1, 1) = k.inverse();
  const Eigen::Matrix3d post_cov = (prior_prec + a.transpose() * a / tau2).inverse();
  const Eigen::Vector3d post_mean = post_cov * a.transpose() * y / tau2;

  Rng rng(10);
  double beta = 0.0;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2);
  std::vector<std::vector<double>> tr(3);
  std::vector<double> cross;
  for (int it = 0; it < 60000; ++it) {
    const FieldLogLik ll = [&](const Eigen::VectorXd& v) {
      double s = 0.0;
      for (int i = 0; i < 5; ++i) s -= 0.5 * std::pow(y[i] - beta - v[cell[i]], 2) / tau2;
      return s;
    };
    f = ess_update_field(f, ll, lk, rng);
    Eigen::VectorXd target(5);
    for (int i = 0; i < 5; ++i) target[i] = y[i] - f[cell[i]];
    beta = gibbs_linear_block(Eigen::MatrixXd::Ones(5, 1), target, tau2, Eigen::VectorXd::Constant(1, 100.0), rng)[0];
    if (it >= 1000) {
      tr[0].push_back(beta);
      tr[1].push_back(f[0]);
      tr[2].push_back(f[1]);
      cross.push_back((beta - post_mean[0]) * (f[1] - post_mean[2]));
    }
  }
  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(std::abs(teststats::mean(tr[j]) - post_mean[j]) < 3.0 * teststats::batch_se(tr[j]));
    std::vector<double> sq;
    for (double v : tr[j]) sq.push_back((v - post_mean[j]) * (v - post_mean[j]));
    CHECK(std::abs(teststats::mean(sq) - post_cov(j, j)) < 3.0 * teststats::batch_se(sq));
  }
  CHECK(std::abs(teststats::mean(cross) - post_cov(0, 2)) < 3.0 * teststats::batch_se(cross));
}

TEST_CASE("run_chain is bit-reproducible and names its parameters") {
  const BivariateDataset d = white_noise_dataset(60, 0.5, 11);
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 5));
  McmcConfig c;
  c.n_burn = 100;
  c.n_keep = 200;
  c.seed = 99;
  c.max_latent_draws = 20;
  const ModelSpec spec{ModelFamily::M4, Scenario::Shared, true, {}};
  const PosteriorDraws a = run_chain(spec, d, g, c), b = run_chain(spec, d, g, c);
  CHECK(a.samples == b.samples);
  CHECK(a.latent.at("eta1") == b.latent.at("eta1"));
  CHECK(a.latent.at("w2") == b.latent.at("w2"));
  CHECK(a.draws() == 200);
  CHECK(a.latent.at("w1").rows() == 20);
  for (const char* n : {"alpha_0", "sigma2_eta", "phi_eta", "beta1_0", "beta2_0", "gamma1", "gamma2", "a11", "a21", "a22",
                        "phi_w1", "phi_w2", "tau1_2", "tau2_2"})
    CHECK(a.has(n));
  CHECK(a.trace("a11").minCoeff() >= 0.0);
  CHECK(a.trace("a22").minCoeff() >= 0.0);
  c.seed = 100;
  CHECK(run_chain(spec, d, g, c).samples != a.samples);
}

TEST_CASE("M1 on white noise recovers the noise variance") {
  const BivariateDataset d = white_noise_dataset(300, std::sqrt(0.3), 12);
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 5));
  McmcConfig c;
  c.n_burn = 300;
  c.n_keep = 1500;
  c.seed = 5;
  const PosteriorDraws dr = run_chain({ModelFamily::M1, Scenario::Shared, true, {}}, d, g, c);
  const Eigen::VectorXd t1 = dr.trace("tau1_2"), b1 = dr.trace("beta1_0");
  CHECK(summarize(to_std(t1)).covers(0.3));
  CHECK(summarize(to_std(b1)).covers(1.0));
  CHECK(summarize(to_std(dr.trace("beta2_0"))).covers(-1.0));
}

TEST_CASE("M4 with zero shared loadings matches M3 in distribution") {
  const BivariateDataset d = white_noise_dataset(80, 0.6, 13);
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 4));
  McmcConfig c;
  c.n_burn = 1000;
  c.n_keep = 20000;
  c.max_latent_draws = 0;
  c.seed = 21;
  const PosteriorDraws m3 = run_chain({ModelFamily::M3, Scenario::Shared, true, {}}, d, g, c);
  c.seed = 22;
  const PosteriorDraws m4 =
      run_chain({ModelFamily::M4, Scenario::Shared, true, {{"gamma1", 0.0}, {"gamma2", 0.0}}}, d, g, c);
  CHECK(m4.trace("gamma1").cwiseAbs().maxCoeff() == 0.0);
  auto thinned = [](const Eigen::VectorXd& v, int step) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < v.size(); i += step) out.push_back(v[i]);
    return out;
  };
  const Eigen::VectorXd a = m3.trace("beta1_0"), b = m4.trace("beta1_0");
  const double ess = std::min(effective_sample_size(to_std(a)), effective_sample_size(to_std(b)));
  const int step = std::max(1, static_cast<int>(20000.0 / std::max(ess, 1.0)));
  const double p = teststats::ks2_pvalue(thinned(a, step), thinned(b, step));
  CAPTURE(p);
  CAPTURE(ess);
  CHECK(p > 0.001);
}

TEST_CASE("joint eta / gamma rescaling leaves the posterior unchanged") {
  const BivariateDataset d = white_noise_dataset(40, 0.6, 14);
  auto g = std::make_shared<GridApprox>(build_grid(Region(), 3));
  const ModelSpec spec{ModelFamily::M2, Scenario::Shared, true, {}};
  McmcConfig c;
  c.n_burn = 2000;
  c.n_keep = 40000;
  c.max_latent_draws = 0;
  c.seed = 31;
  const PosteriorDraws with = run_chain(spec, d, g, c);
  REQUIRE(with.acceptance.count("eta_scale"));
  CHECK(with.acceptance.at("eta_scale") > 0.05);
  CHECK(with.acceptance.at("eta_scale") < 0.95);
  c.step_scale = 0.0;
  c.seed = 32;
  const PosteriorDraws without = run_chain(spec, d, g, c);
  for (const std::string name : {"gamma1", "sigma2_eta", "beta2_0"}) {
    const Eigen::VectorXd a = with.trace(name), b = without.trace(name);
    const double ess = std::min(effective_sample_size(to_std(a)), effective_sample_size(to_std(b)));
    const int step = std::max(1, static_cast<int>(40000.0 / std::max(ess, 1.0)));
    std::vector<double> ta, tb;
    for (Eigen::Index i = 0; i < a.size(); i += step) {
      ta.push_back(a[i]);
      tb.push_back(b[i]);
    }
    const double p = teststats::ks2_pvalue(ta, tb);
    CAPTURE(name);
    CAPTURE(ess);
    CAPTURE(p);
    CHECK(p > 0.001);
  }
  const PosteriorDraws m1 = run_chain({ModelFamily::M1, Scenario::Shared, true, {}}, d, g, c);
  CHECK(m1.acceptance.count("eta_scale") == 0);
}

TEST_CASE("invalid configurations are rejected") {
  McmcConfig c;
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = McmcConfig{};
  c.n_keep = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
