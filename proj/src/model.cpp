#include "prefsamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prefsamp/error.hpp"
#include "prefsamp/gp.hpp"

namespace prefsamp {

FamilyTraits traits(ModelFamily family) noexcept {
  switch (family) {
    case ModelFamily::M1: return {false, false, true};
    case ModelFamily::M2: return {true, false, true};
    case ModelFamily::M3: return {false, true, true};
    case ModelFamily::M4: return {true, true, true};
    case ModelFamily::M1Star: return {false, true, true};
    case ModelFamily::M2Star: return {true, true, true};
    case ModelFamily::Uni1: return {false, false, false};
    case ModelFamily::Uni2: return {true, false, false};
    case ModelFamily::Uni3: return {false, true, false};
    case ModelFamily::Uni4: return {true, true, false};
  }
  return {};
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::M1: return "M1";
    case ModelFamily::M2: return "M2";
    case ModelFamily::M3: return "M3";
    case ModelFamily::M4: return "M4";
    case ModelFamily::M1Star: return "M1star";
    case ModelFamily::M2Star: return "M2star";
    case ModelFamily::Uni1: return "uni1";
    case ModelFamily::Uni2: return "uni2";
    case ModelFamily::Uni3: return "uni3";
    case ModelFamily::Uni4: return "uni4";
  }
  return "?";
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Shared: return "shared";
    case Scenario::Overlapping: return "overlapping";
    case Scenario::Disjoint: return "disjoint";
  }
  return "?";
}

ModelFamily parse_family(const std::string& s) {
  for (auto f : {ModelFamily::M1, ModelFamily::M2, ModelFamily::M3, ModelFamily::M4, ModelFamily::M1Star,
                 ModelFamily::M2Star, ModelFamily::Uni1, ModelFamily::Uni2, ModelFamily::Uni3, ModelFamily::Uni4}) {
    std::string name = to_string(f);
    if (std::equal(name.begin(), name.end(), s.begin(), s.end(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
      return f;
  }
  throw InvalidArgument("unknown model family '" + s + "'");
}

Scenario parse_scenario(const std::string& s) {
  if (s == "shared") return Scenario::Shared;
  if (s == "overlapping") return Scenario::Overlapping;
  if (s == "disjoint") return Scenario::Disjoint;
  throw InvalidArgument("unknown scenario '" + s + "'");
}

void ModelSpec::validate() const {
  const bool star = family == ModelFamily::M1Star || family == ModelFamily::M2Star;
  const bool uni = !traits(family).bivariate;
  if (scenario == Scenario::Disjoint && !star)
    throw InvalidArgument("disjoint scenario supports only M1star and M2star, got " + to_string(family));
  if (scenario != Scenario::Disjoint && star)
    throw InvalidArgument(to_string(family) + " requires the disjoint scenario");
  if (uni && scenario != Scenario::Shared)
    throw InvalidArgument("univariate families require the shared scenario");
  for (const auto& [name, value] : fixed) {
    if (name != "gamma1" && name != "gamma2" && name != "a11" && name != "a21" && name != "a22")
      throw InvalidArgument("cannot fix unknown coefficient '" + name + "'");
    if (!std::isfinite(value)) throw InvalidArgument("fixed value for " + name + " must be finite");
  }
}

std::size_t BivariateDataset::observed_count(int response) const {
  const auto& m = response == 0 ? obs1 : obs2;
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

std::vector<Location> BivariateDataset::pattern(Scenario scenario, int which) const {
  std::vector<Location> out;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    bool in = scenario == Scenario::Disjoint ? observed(which, i) : (obs1[i] || obs2[i]);
    if (in) out.push_back(sites[i]);
  }
  return out;
}

BivariateDataset BivariateDataset::subset(std::span<const std::size_t> idx) const {
  BivariateDataset out;
  out.region = region;
  out.covariates = covariates;
  out.response_covariate_names = response_covariate_names;
  out.response_covariates.resize(static_cast<Eigen::Index>(idx.size()), response_covariates.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    if (i >= sites.size()) throw InvalidArgument("subset index out of range");
    out.sites.push_back(sites[i]);
    out.y1.push_back(y1[i]);
    out.y2.push_back(y2[i]);
    out.obs1.push_back(obs1[i]);
    out.obs2.push_back(obs2[i]);
    if (response_covariates.cols() > 0)
      out.response_covariates.row(static_cast<Eigen::Index>(k)) = response_covariates.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Eigen::VectorXd BivariateDataset::response_design(std::size_t i) const {
  Eigen::VectorXd x = covariates->at(sites[i]);
  if (response_covariates.cols() == 0) return x;
  Eigen::VectorXd out(x.size() + response_covariates.cols());
  out << x, response_covariates.row(static_cast<Eigen::Index>(i)).transpose();
  return out;
}

std::size_t BivariateDataset::response_design_dim() const {
  return covariates->dim() + static_cast<std::size_t>(response_covariates.cols());
}

void BivariateDataset::validate() const {
  const std::size_t n = sites.size();
  if (y1.size() != n || y2.size() != n || obs1.size() != n || obs2.size() != n)
    throw InvalidArgument("dataset vectors must all match the site count");
  if (!covariates) throw InvalidArgument("dataset has no covariate provider");
  if (response_covariates.cols() > 0 && static_cast<std::size_t>(response_covariates.rows()) != n)
    throw InvalidArgument("response covariate block must have one row per site");
  for (std::size_t i = 0; i < n; ++i) {
    if (!region.contains(sites[i])) throw InvalidArgument("site " + std::to_string(i) + " lies outside the region");
    if (obs1[i] && !std::isfinite(y1[i])) throw InvalidArgument("observed y1 at site " + std::to_string(i) + " is not finite");
    if (obs2[i] && !std::isfinite(y2[i])) throw InvalidArgument("observed y2 at site " + std::to_string(i) + " is not finite");
  }
}

void BivariateDataset::validate_for(Scenario scenario) const {
  validate();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (scenario == Scenario::Shared && !(obs1[i] && obs2[i]))
      throw InvalidArgument("shared scenario needs both responses at every site (site " + std::to_string(i) + ")");
    if (scenario == Scenario::Disjoint && (obs1[i] != 0) == (obs2[i] != 0))
      throw InvalidArgument("disjoint scenario needs exactly one response per site (site " + std::to_string(i) + ")");
  }
}

Priors priors_default() { return Priors{}; }

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * d * d / var;
}

double inv_gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double uniform_logpdf(double x, double lo, double hi) {
  if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
  return -std::log(hi - lo);
}

ParamState ParamState::initial(const ModelSpec& spec, std::size_t cells, std::size_t lgcp_dim,
                               std::size_t response_dim, const Priors& priors) {
  auto ig_mean = [](double shape, double rate) { return shape > 1.0 ? rate / (shape - 1.0) : rate; };
  const FamilyTraits t = traits(spec.family);
  const auto k = static_cast<Eigen::Index>(cells);
  ParamState s;
  for (int i = 0; i < spec.lgcp_count(); ++i)
    s.lgcp.push_back({Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lgcp_dim)),
                      {ig_mean(priors.sigma2_shape, priors.sigma2_rate), 3.0},
                      Eigen::VectorXd::Zero(k)});
  s.beta1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(response_dim));
  s.beta2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(response_dim));
  s.tau1_2 = s.tau2_2 = ig_mean(priors.tau2_shape, priors.tau2_rate);
  s.w1 = Eigen::VectorXd::Zero(k);
  s.w2 = Eigen::VectorXd::Zero(k);
  if (t.coreg) {
    s.coreg.a11 = 1.0;
    if (t.bivariate) s.coreg.a22 = 1.0;
  }
  for (const auto& [name, value] : spec.fixed) {
    if (name == "gamma1") s.ps.gamma1 = value;
    else if (name == "gamma2") s.ps.gamma2 = value;
    else if (name == "a11") s.coreg.a11 = value;
    else if (name == "a21") s.coreg.a21 = value;
    else if (name == "a22") s.coreg.a22 = value;
  }
  return s;
}

ModelData::ModelData(const ModelSpec& spec, const BivariateDataset& data, std::shared_ptr<const GridApprox> grid)
    : spec_(spec), grid_(std::move(grid)) {
  spec_.validate();
  data.validate();
  if (!grid_) throw InvalidArgument("model data needs a grid");
  lgcp_dim_ = data.covariates->dim();
  response_dim_ = data.response_design_dim();
  for (int k = 0; k < spec_.lgcp_count(); ++k) {
    auto pattern = data.pattern(spec_.scenario, k);
    lgcp_.emplace_back(*data.covariates, pattern, *grid_);
  }
  for (int j = 0; j < spec_.response_count(); ++j) {
    ResponseBlock b;
    b.response = j;
    b.eta_index = spec_.scenario == Scenario::Disjoint ? j : 0;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.observed(j, i)) b.site.push_back(i);
    const auto n = static_cast<Eigen::Index>(b.site.size());
    b.y.resize(n);
    b.x.resize(n, static_cast<Eigen::Index>(response_dim_));
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t i = b.site[static_cast<std::size_t>(r)];
      b.y[r] = data.y(j, i);
      b.x.row(r) = data.response_design(i).transpose();
      b.cell.push_back(static_cast<Eigen::Index>(grid_->nearest_centroid(data.sites[i])));
    }
    responses_.push_back(std::move(b));
  }
}

Loadings loadings(const ModelSpec& spec, const ParamState& s, int response) {
  const FamilyTraits t = traits(spec.family);
  Loadings l;
  if (t.shared_process) l.eta = s.gamma(response);
  if (t.coreg) {
    if (response == 0) {
      l.w1 = s.coreg.a11;
    } else {
      l.w1 = s.coreg.a21;
      l.w2 = s.coreg.a22;
    }
  }
  return l;
}

Eigen::VectorXd ModelData::mean(const ResponseBlock& r, const ParamState& s) const {
  Eigen::VectorXd mu = r.x * s.beta(r.response);
  const Loadings l = loadings(spec_, s, r.response);
  const Eigen::VectorXd& eta = s.lgcp.at(static_cast<std::size_t>(r.eta_index)).eta;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Eigen::Index c = r.cell[static_cast<std::size_t>(i)];
    if (l.eta != 0.0) mu[i] += l.eta * eta[c];
    if (l.w1 != 0.0) mu[i] += l.w1 * s.w1[c];
    if (l.w2 != 0.0) mu[i] += l.w2 * s.w2[c];
  }
  return mu;
}

double response_loglik(const ModelData& md, const ParamState& state) {
  double ll = 0.0;
  for (const auto& r : md.responses()) {
    const double tau2 = state.tau2(r.response);
    if (!(tau2 > 0.0)) throw InvalidArgument("tau2 must be positive");
    const Eigen::VectorXd resid = r.y - md.mean(r, state);
    const double n = static_cast<double>(resid.size());
    ll += -0.5 * n * std::log(2.0 * std::numbers::pi * tau2) - 0.5 * resid.squaredNorm() / tau2;
  }
  return ll;
}

double response_loglik(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data,
                       std::shared_ptr<const GridApprox> grid) {
  return response_loglik(ModelData(spec, data, std::move(grid)), state);
}

double marginal_response_loglik(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data) {
  spec.validate();
  data.validate();
  struct Obs {
    int response;
    std::size_t site;
  };
  std::vector<Obs> obs;
  for (int j = 0; j < spec.response_count(); ++j)
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.observed(j, i)) obs.push_back({j, i});
  const auto n = static_cast<Eigen::Index>(obs.size());
  if (n == 0) return 0.0;

  Eigen::VectorXd resid(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& o = obs[static_cast<std::size_t>(a)];
    resid[a] = data.y(o.response, o.site) - data.response_design(o.site).dot(state.beta(o.response));
  }

  // Sum over independent latent processes of loading_a * loading_b * K(s_a, s_b).
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  auto add_process = [&](const ExpKernelParams& kernel, auto loading_of) {
    for (Eigen::Index a = 0; a < n; ++a) {
      const double la = loading_of(obs[static_cast<std::size_t>(a)].response);
      if (la == 0.0) continue;
      for (Eigen::Index b = 0; b < n; ++b) {
        const double lb = loading_of(obs[static_cast<std::size_t>(b)].response);
        if (lb == 0.0) continue;
        const double h = distance(data.sites[obs[static_cast<std::size_t>(a)].site],
                                  data.sites[obs[static_cast<std::size_t>(b)].site]);
        cov(a, b) += la * lb * exp_cov(kernel, h);
      }
    }
  };
  for (int k = 0; k < spec.lgcp_count(); ++k) {
    add_process(state.lgcp.at(static_cast<std::size_t>(k)).kernel, [&](int j) {
      const int eta_index = spec.scenario == Scenario::Disjoint ? j : 0;
      return eta_index == k ? loadings(spec, state, j).eta : 0.0;
    });
  }
  add_process(state.w1_kernel(), [&](int j) { return loadings(spec, state, j).w1; });
  add_process(state.w2_kernel(), [&](int j) { return loadings(spec, state, j).w2; });
  for (Eigen::Index a = 0; a < n; ++a) cov(a, a) += state.tau2(obs[static_cast<std::size_t>(a)].response);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw FactorizationError("marginal covariance is not positive definite", 0.0);
  Eigen::MatrixXd lower = llt.matrixL();
  return gaussian_log_density(lower, resid);
}

double log_prior(const ModelSpec& spec, const ParamState& s, const Priors& p) {
  const FamilyTraits t = traits(spec.family);
  double lp = 0.0;
  for (const auto& g : s.lgcp) {
    for (Eigen::Index i = 0; i < g.alpha.size(); ++i) lp += normal_logpdf(g.alpha[i], 0.0, p.alpha_var);
    lp += inv_gamma_logpdf(g.kernel.sigma2, p.sigma2_shape, p.sigma2_rate);
    lp += uniform_logpdf(g.kernel.phi, p.phi_min, p.phi_max);
  }
  for (int j = 0; j < spec.response_count(); ++j) {
    if (spec.response_mean)
      for (Eigen::Index i = 0; i < s.beta(j).size(); ++i) lp += normal_logpdf(s.beta(j)[i], 0.0, p.beta_var);
    lp += inv_gamma_logpdf(s.tau2(j), p.tau2_shape, p.tau2_rate);
  }
  if (t.shared_process) {
    if (!spec.is_fixed("gamma1")) lp += normal_logpdf(s.ps.gamma1, 0.0, p.gamma_var);
    if (t.bivariate && !spec.is_fixed("gamma2")) lp += normal_logpdf(s.ps.gamma2, 0.0, p.gamma_var);
  }
  if (t.coreg) {
    if (!spec.is_fixed("a11")) lp += normal_logpdf(s.coreg.a11, 0.0, p.coreg_var);
    lp += uniform_logpdf(s.phi_w1, p.phi_min, p.phi_max);
    if (t.bivariate) {
      if (!spec.is_fixed("a21")) lp += normal_logpdf(s.coreg.a21, 0.0, p.coreg_var);
      if (!spec.is_fixed("a22")) lp += normal_logpdf(s.coreg.a22, 0.0, p.coreg_var);
      lp += uniform_logpdf(s.phi_w2, p.phi_min, p.phi_max);
    }
  }
  return lp;
}

PosteriorTerms posterior_terms(const ModelData& md, const ParamState& s, const Priors& priors) {
  const FamilyTraits t = traits(md.spec().family);
  PosteriorTerms out;
  for (std::size_t k = 0; k < md.lgcp().size(); ++k) out.lgcp += md.lgcp()[k].loglik(s.lgcp.at(k).alpha, s.lgcp.at(k).eta);
  out.response = response_loglik(md, s);
  const auto& centroids = md.grid().centroids();
  for (const auto& g : s.lgcp) out.latent += gaussian_log_density(cov_matrix(g.kernel, centroids).lower, g.eta);
  if (t.coreg) {
    out.latent += gaussian_log_density(cov_matrix(s.w1_kernel(), centroids).lower, s.w1);
    if (t.bivariate) out.latent += gaussian_log_density(cov_matrix(s.w2_kernel(), centroids).lower, s.w2);
  }
  out.prior = log_prior(md.spec(), s, priors);
  return out;
}

double joint_log_posterior(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data,
                           std::shared_ptr<const GridApprox> grid, const Priors& priors) {
  return posterior_terms(ModelData(spec, data, std::move(grid)), state, priors).total();
}

}  // namespace prefsamp
