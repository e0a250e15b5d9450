#include "prefsamp/mcmc.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "prefsamp/adaptive.hpp"
#include "prefsamp/diagnostics.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

namespace {

double logit(double u) { return std::log(u / (1.0 - u)); }
double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::string lgcp_suffix(const ModelSpec& spec, int k) {
  return spec.lgcp_count() == 1 ? std::string() : std::to_string(k + 1);
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace

void McmcConfig::validate() const {
  if (n_burn < 0 || n_keep < 0) throw InvalidArgument("iteration counts must be non-negative");
  if (thin < 1) throw InvalidArgument("thin must be at least 1");
  if (ess_sweeps < 1) throw InvalidArgument("ess_sweeps must be at least 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw InvalidArgument("warmup_fraction must lie in [0, 1]");
  if (max_latent_draws < 0) throw InvalidArgument("max_latent_draws must be non-negative");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw InvalidArgument("target acceptance must lie in (0, 1)");
  if (step_alpha < 0.0 || step_hyper < 0.0 || step_phi_w < 0.0 || step_scale < 0.0) throw InvalidArgument("step sizes must be non-negative");
  if (!(priors.phi_max > priors.phi_min)) throw InvalidArgument("phi prior needs max > min");
}

// ---------------------------------------------------------------------------
// Parameter packing

std::vector<std::string> parameter_names(const ModelSpec& spec, std::size_t lgcp_dim, std::size_t response_dim) {
  const FamilyTraits t = traits(spec.family);
  std::vector<std::string> names;
  for (int k = 0; k < spec.lgcp_count(); ++k) {
    const std::string sfx = lgcp_suffix(spec, k);
    for (std::size_t i = 0; i < lgcp_dim; ++i) names.push_back("alpha" + sfx + "_" + std::to_string(i));
    names.push_back("sigma2_eta" + sfx);
    names.push_back("phi_eta" + sfx);
  }
  for (int j = 0; j < spec.response_count(); ++j)
    for (std::size_t i = 0; i < response_dim; ++i)
      names.push_back("beta" + std::to_string(j + 1) + "_" + std::to_string(i));
  if (t.shared_process) {
    names.push_back("gamma1");
    if (t.bivariate) names.push_back("gamma2");
  }
  if (t.coreg) {
    names.push_back("a11");
    names.push_back("phi_w1");
    if (t.bivariate) {
      names.push_back("a21");
      names.push_back("a22");
      names.push_back("phi_w2");
    }
  }
  names.push_back("tau1_2");
  if (t.bivariate) names.push_back("tau2_2");
  return names;
}

Eigen::VectorXd pack_state(const ModelSpec& spec, const ParamState& s, std::size_t lgcp_dim,
                           std::size_t response_dim) {
  const FamilyTraits t = traits(spec.family);
  std::vector<double> v;
  for (int k = 0; k < spec.lgcp_count(); ++k) {
    const auto& g = s.lgcp.at(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < lgcp_dim; ++i) v.push_back(g.alpha[static_cast<Eigen::Index>(i)]);
    v.push_back(g.kernel.sigma2);
    v.push_back(g.kernel.phi);
  }
  for (int j = 0; j < spec.response_count(); ++j)
    for (std::size_t i = 0; i < response_dim; ++i) v.push_back(s.beta(j)[static_cast<Eigen::Index>(i)]);
  if (t.shared_process) {
    v.push_back(s.ps.gamma1);
    if (t.bivariate) v.push_back(s.ps.gamma2);
  }
  if (t.coreg) {
    v.push_back(s.coreg.a11);
    v.push_back(s.phi_w1);
    if (t.bivariate) {
      v.push_back(s.coreg.a21);
      v.push_back(s.coreg.a22);
      v.push_back(s.phi_w2);
    }
  }
  v.push_back(s.tau1_2);
  if (t.bivariate) v.push_back(s.tau2_2);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void unpack_state(const ModelSpec& spec, const Eigen::VectorXd& v, std::size_t lgcp_dim, std::size_t response_dim,
                  ParamState& s) {
  const FamilyTraits t = traits(spec.family);
  Eigen::Index p = 0;
  auto next = [&]() {
    if (p >= v.size()) throw InvalidArgument("parameter vector too short for the model");
    return v[p++];
  };
  s.lgcp.resize(static_cast<std::size_t>(spec.lgcp_count()));
  for (auto& g : s.lgcp) {
    g.alpha.resize(static_cast<Eigen::Index>(lgcp_dim));
    for (std::size_t i = 0; i < lgcp_dim; ++i) g.alpha[static_cast<Eigen::Index>(i)] = next();
    g.kernel.sigma2 = next();
    g.kernel.phi = next();
  }
  s.beta1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(response_dim));
  s.beta2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(response_dim));
  for (int j = 0; j < spec.response_count(); ++j) {
    auto& b = j == 0 ? s.beta1 : s.beta2;
    for (std::size_t i = 0; i < response_dim; ++i) b[static_cast<Eigen::Index>(i)] = next();
  }
  s.ps = {};
  s.coreg = {};
  if (t.shared_process) {
    s.ps.gamma1 = next();
    if (t.bivariate) s.ps.gamma2 = next();
  }
  if (t.coreg) {
    s.coreg.a11 = next();
    s.phi_w1 = next();
    if (t.bivariate) {
      s.coreg.a21 = next();
      s.coreg.a22 = next();
      s.phi_w2 = next();
    }
  }
  s.tau1_2 = next();
  if (t.bivariate) s.tau2_2 = next();
  if (p != v.size()) throw InvalidArgument("parameter vector too long for the model");
}

bool PosteriorDraws::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::Index PosteriorDraws::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("no trace named '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

Eigen::VectorXd PosteriorDraws::trace(const std::string& name) const { return samples.col(column(name)); }

ParamState PosteriorDraws::state(long row, long snapshot) const {
  if (row < 0 || row >= draws()) throw InvalidArgument("draw index out of range");
  ParamState s;
  unpack_state(spec, samples.row(row).transpose(), lgcp_dim, response_dim, s);
  const auto k = static_cast<Eigen::Index>(cells);
  auto field = [&](const std::string& key) -> Eigen::VectorXd {
    auto it = latent.find(key);
    if (snapshot < 0 || it == latent.end()) return Eigen::VectorXd::Zero(k);
    if (snapshot >= it->second.rows()) throw InvalidArgument("latent snapshot index out of range");
    return it->second.row(snapshot).transpose();
  };
  for (std::size_t i = 0; i < s.lgcp.size(); ++i) s.lgcp[i].eta = field("eta" + std::to_string(i + 1));
  s.w1 = field("w1");
  s.w2 = field("w2");
  return s;
}

// ---------------------------------------------------------------------------
// Field likelihoods and elliptical slice sampling

FieldLikelihood::FieldLikelihood(Eigen::Index cells)
    : linear(Eigen::VectorXd::Zero(cells)), quad(Eigen::VectorXd::Zero(cells)) {}

double FieldLikelihood::operator()(const Eigen::VectorXd& f) const {
  const auto n = static_cast<std::size_t>(f.size());
  double v = kernels::dot({linear.data(), n}, {f.data(), n}) - 0.5 * (quad.array() * f.array().square()).sum();
  if (area > 0.0) v -= area * kernels::sum_exp2({offset.data(), n}, {f.data(), n});
  return v;
}

namespace {

// Adds the Gaussian response terms of every block loading on `field` with
// loading `load(block)`.
template <class Load>
void add_response_terms(const ModelData& md, const ParamState& s, const Eigen::VectorXd& field, Load load,
                        FieldLikelihood& fl) {
  for (const auto& r : md.responses()) {
    const double g = load(r);
    if (g == 0.0) continue;
    const double tau2 = s.tau2(r.response);
    const Eigen::VectorXd mu = md.mean(r, s);
    for (Eigen::Index i = 0; i < r.y.size(); ++i) {
      const Eigen::Index c = r.cell[static_cast<std::size_t>(i)];
      const double resid = r.y[i] - (mu[i] - g * field[c]);
      fl.linear[c] += g * resid / tau2;
      fl.quad[c] += g * g / tau2;
    }
  }
}

}  // namespace

FieldLikelihood eta_likelihood(const ModelData& md, const ParamState& s, int k) {
  const auto& terms = md.lgcp().at(static_cast<std::size_t>(k));
  const auto& eta = s.lgcp.at(static_cast<std::size_t>(k)).eta;
  FieldLikelihood fl(eta.size());
  fl.linear = terms.cell_counts();
  fl.offset = terms.cell_offset(s.lgcp[static_cast<std::size_t>(k)].alpha);
  fl.area = terms.cell_area();
  add_response_terms(
      md, s, eta,
      [&](const ResponseBlock& r) { return r.eta_index == k ? loadings(md.spec(), s, r.response).eta : 0.0; }, fl);
  return fl;
}

FieldLikelihood w_likelihood(const ModelData& md, const ParamState& s, int which) {
  const Eigen::VectorXd& w = which == 1 ? s.w1 : s.w2;
  FieldLikelihood fl(w.size());
  add_response_terms(
      md, s, w,
      [&](const ResponseBlock& r) {
        const Loadings l = loadings(md.spec(), s, r.response);
        return which == 1 ? l.w1 : l.w2;
      },
      fl);
  return fl;
}

Eigen::VectorXd ess_update_field(const Eigen::VectorXd& field, const FieldLogLik& loglik,
                                 const Eigen::MatrixXd& lower, Rng& rng, double scale) {
  const double current = loglik(field);
  if (!std::isfinite(current)) throw NumericalError("elliptical slice sampling from a state with non-finite likelihood");
  Eigen::VectorXd nu = lower.triangularView<Eigen::Lower>() * standard_normal(field.size(), rng);
  nu *= scale;
  const double threshold = current + std::log(rng.uniform_open());

  double theta = 2.0 * std::numbers::pi * rng.uniform();
  double lo = theta - 2.0 * std::numbers::pi;
  double hi = theta;
  const auto n = static_cast<std::size_t>(field.size());
  Eigen::VectorXd proposal(field.size());
  for (;;) {
    kernels::axpby(std::cos(theta), {field.data(), n}, std::sin(theta), {nu.data(), n}, {proposal.data(), n});
    const double ll = loglik(proposal);
    if (std::isfinite(ll) && ll > threshold) return proposal;
    if (theta < 0.0) lo = theta;
    else hi = theta;
    if (hi - lo < 1e-12) return field;
    theta = lo + (hi - lo) * rng.uniform();
  }
}

// ---------------------------------------------------------------------------
// Hyperparameters

const Eigen::MatrixXd& CorrelationFactor::lower(double phi) {
  if (!dist_) throw InvalidArgument("correlation factor has no distance matrix");
  if (phi != phi_) {
    lower_ = cov_matrix_from_distances({1.0, phi}, *dist_).lower;
    phi_ = phi;
  }
  return lower_;
}

HyperMove update_hyperparams(const ExpKernelParams& params, const Eigen::VectorXd& field, const FieldLogLik& loglik,
                             const Priors& priors, bool update_sigma2, AdaptiveProposal& proposal,
                             CorrelationFactor& current, CorrelationFactor& scratch, Rng& rng) {
  const double lo = priors.phi_min, hi = priors.phi_max;
  if (!(params.phi > lo && params.phi < hi)) throw InvalidArgument("phi outside its prior support");
  const double u = (params.phi - lo) / (hi - lo);
  Eigen::VectorXd x(update_sigma2 ? 2 : 1);
  if (update_sigma2) x[0] = std::log(params.sigma2);
  x[x.size() - 1] = logit(u);

  const Eigen::VectorXd xp = proposal.propose(x, rng);
  const double log_u = std::log(rng.uniform_open());
  HyperMove out{params, field, false};

  const double up = expit(xp[xp.size() - 1]);
  const double phi_p = lo + (hi - lo) * up;
  const double sigma2_p = update_sigma2 ? std::exp(xp[0]) : params.sigma2;
  bool ok = up > 0.0 && up < 1.0 && phi_p > lo && phi_p < hi && sigma2_p > 0.0 && std::isfinite(sigma2_p);
  if (ok && xp != x) {
    const Eigen::VectorXd z =
        current.lower(params.phi).triangularView<Eigen::Lower>().solve(field) / std::sqrt(params.sigma2);
    Eigen::VectorXd fp = scratch.lower(phi_p).triangularView<Eigen::Lower>() * z;
    fp *= std::sqrt(sigma2_p);
    double log_ratio = loglik(fp) - loglik(field);
    log_ratio += std::log(up * (1.0 - up)) - std::log(u * (1.0 - u));
    if (update_sigma2) {
      log_ratio += inv_gamma_logpdf(sigma2_p, priors.sigma2_shape, priors.sigma2_rate) -
                   inv_gamma_logpdf(params.sigma2, priors.sigma2_shape, priors.sigma2_rate);
      log_ratio += xp[0] - x[0];
    }
    if (std::isfinite(log_ratio) && log_u < log_ratio) {
      out.params = {sigma2_p, phi_p};
      out.field = std::move(fp);
      out.accepted = true;
      std::swap(current, scratch);
    }
  }
  proposal.count(out.accepted);
  proposal.adapt(out.accepted, out.accepted ? xp : x);
  return out;
}

CenteredMove update_hyperparams_centered(const ExpKernelParams& params, const Eigen::VectorXd& field,
                                         const Priors& priors, bool update_sigma2, AdaptiveProposal& phi_proposal,
                                         CorrelationFactor& current, CorrelationFactor& scratch, Rng& rng) {
  const double lo = priors.phi_min, hi = priors.phi_max;
  if (!(params.phi > lo && params.phi < hi)) throw InvalidArgument("phi outside its prior support");
  auto whiten = [&](CorrelationFactor& f, double phi, double& logdet) {
    const Eigen::MatrixXd& l = f.lower(phi);
    logdet = l.diagonal().array().log().sum();
    return l.triangularView<Eigen::Lower>().solve(field).squaredNorm();
  };
  CenteredMove out{params, false};
  double logdet = 0.0;
  const double q = whiten(current, params.phi, logdet);
  if (update_sigma2)
    out.params.sigma2 =
        rng.inv_gamma(priors.sigma2_shape + 0.5 * static_cast<double>(field.size()), priors.sigma2_rate + 0.5 * q);

  const double u = (params.phi - lo) / (hi - lo);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, logit(u));
  const Eigen::VectorXd xp = phi_proposal.propose(x, rng);
  const double log_u = std::log(rng.uniform_open());
  const double up = expit(xp[0]);
  const double phi_p = lo + (hi - lo) * up;
  if (up > 0.0 && up < 1.0 && phi_p > lo && phi_p < hi && xp != x) {
    double logdet_p = 0.0;
    const double qp = whiten(scratch, phi_p, logdet_p);
    const double s2 = out.params.sigma2;
    const double log_ratio = -(logdet_p - logdet) - 0.5 * (qp - q) / s2 + std::log(up * (1.0 - up)) -
                             std::log(u * (1.0 - u));
    if (std::isfinite(log_ratio) && log_u < log_ratio) {
      out.params.phi = phi_p;
      out.phi_accepted = true;
      std::swap(current, scratch);
    }
  }
  phi_proposal.count(out.phi_accepted);
  phi_proposal.adapt(out.phi_accepted, out.phi_accepted ? xp : x);
  return out;
}

// ---------------------------------------------------------------------------
// Conjugate blocks

Eigen::VectorXd gibbs_linear_block(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, double tau2,
                                   const Eigen::VectorXd& prior_var, Rng& rng) {
  const Eigen::Index p = prior_var.size();
  if (design.cols() != p || design.rows() != target.size()) throw InvalidArgument("linear block dimensions disagree");
  if (!(tau2 > 0.0)) throw InvalidArgument("tau2 must be positive");
  if ((prior_var.array() <= 0.0).any()) throw InvalidArgument("prior variances must be positive");
  Eigen::MatrixXd q = design.transpose() * design / tau2;
  q.diagonal() += prior_var.cwiseInverse();
  const Eigen::VectorXd b = design.transpose() * target / tau2;
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw NumericalError("linear block precision is not positive definite");
  const Eigen::VectorXd mean = llt.solve(b);
  const Eigen::VectorXd z = standard_normal(p, rng);
  return mean + llt.matrixU().solve(z);
}

double draw_tau2(double ssr, std::size_t n, double shape, double rate, Rng& rng) {
  return rng.inv_gamma(shape + 0.5 * static_cast<double>(n), rate + 0.5 * ssr);
}

// ---------------------------------------------------------------------------
// Chain

namespace {

struct Block {
  std::string name;
  AdaptiveProposal proposal;
};

void check_initial(const ModelData& md, const ParamState& s, const Priors& priors) {
  PosteriorTerms terms;
  try {
    terms = posterior_terms(md, s, priors);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("non-finite posterior at initialization: ") + e.what());
  }
  auto check = [](double v, const char* term) {
    if (!std::isfinite(v))
      throw NumericalError(std::string("non-finite posterior at initialization in the ") + term + " term");
  };
  check(terms.lgcp, "LGCP likelihood");
  check(terms.response, "response likelihood");
  check(terms.latent, "latent field prior");
  check(terms.prior, "parameter prior");
}

// Columns of the linear conditional for one response, in a fixed order.
struct LinearColumn {
  enum Kind { Beta, Eta, W1, W2 } kind;
  Eigen::Index index = 0;
};

void update_linear(const ModelData& md, ParamState& s, int j, const Priors& priors, bool hold_gamma, Rng& rng) {
  const ModelSpec& spec = md.spec();
  const FamilyTraits t = traits(spec.family);
  const ResponseBlock& r = md.responses().at(static_cast<std::size_t>(j));
  const auto n = r.y.size();
  const std::string gname = j == 0 ? "gamma1" : "gamma2";
  const std::string a1name = j == 0 ? "a11" : "a21";
  const Eigen::VectorXd& eta = s.lgcp.at(static_cast<std::size_t>(r.eta_index)).eta;
  const bool draw_gamma = t.shared_process && !spec.is_fixed(gname) && !hold_gamma;

  std::vector<LinearColumn> cols;
  std::vector<double> var;
  if (spec.response_mean)
    for (Eigen::Index i = 0; i < r.x.cols(); ++i) {
      cols.push_back({LinearColumn::Beta, i});
      var.push_back(priors.beta_var);
    }
  if (draw_gamma) {
    cols.push_back({LinearColumn::Eta});
    var.push_back(priors.gamma_var);
  }
  if (t.coreg && !spec.is_fixed(a1name)) {
    cols.push_back({LinearColumn::W1});
    var.push_back(priors.coreg_var);
  }
  if (t.coreg && j == 1 && !spec.is_fixed("a22")) {
    cols.push_back({LinearColumn::W2});
    var.push_back(priors.coreg_var);
  }

  // Target: y minus the contribution of every fixed coefficient.
  const Loadings l = loadings(spec, s, j);
  Eigen::VectorXd target = r.y;
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = r.cell[static_cast<std::size_t>(i)];
    if (t.shared_process && !draw_gamma) target[i] -= l.eta * eta[c];
    if (t.coreg && spec.is_fixed(a1name)) target[i] -= l.w1 * s.w1[c];
    if (t.coreg && j == 1 && spec.is_fixed("a22")) target[i] -= l.w2 * s.w2[c];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0.0;
      switch (cols[k].kind) {
        case LinearColumn::Beta: v = r.x(i, cols[k].index); break;
        case LinearColumn::Eta: v = eta[c]; break;
        case LinearColumn::W1: v = s.w1[c]; break;
        case LinearColumn::W2: v = s.w2[c]; break;
      }
      design(i, static_cast<Eigen::Index>(k)) = v;
    }
  }
  if (cols.empty()) return;
  const Eigen::VectorXd draw = gibbs_linear_block(
      design, target, s.tau2(j), Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size())),
      rng);

  Eigen::VectorXd& beta = j == 0 ? s.beta1 : s.beta2;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double v = draw[static_cast<Eigen::Index>(k)];
    switch (cols[k].kind) {
      case LinearColumn::Beta: beta[cols[k].index] = v; break;
      case LinearColumn::Eta: (j == 0 ? s.ps.gamma1 : s.ps.gamma2) = v; break;
      case LinearColumn::W1: (j == 0 ? s.coreg.a11 : s.coreg.a21) = v; break;
      case LinearColumn::W2: s.coreg.a22 = v; break;
    }
  }
}

// Reflections (a11, a21, w1) -> -(...) and (a22, w2) -> -(...) leave the
// posterior unchanged; apply them to keep a11, a22 >= 0.
void apply_sign_convention(const ModelSpec& spec, ParamState& s) {
  const FamilyTraits t = traits(spec.family);
  if (!t.coreg) return;
  if (!spec.is_fixed("a11") && s.coreg.a11 < 0.0 && (!spec.is_fixed("a21") || s.coreg.a21 == 0.0)) {
    s.coreg.a11 = -s.coreg.a11;
    if (!spec.is_fixed("a21")) s.coreg.a21 = -s.coreg.a21;
    s.w1 = -s.w1;
  }
  if (t.bivariate && !spec.is_fixed("a22") && s.coreg.a22 < 0.0) {
    s.coreg.a22 = -s.coreg.a22;
    s.w2 = -s.w2;
  }
}

// Moves along eta -> c eta, sigma2 -> c^2 sigma2, gamma_j -> gamma_j / c for
// the responses loading on LGCP field k. Response means are unchanged, so
// only the intensity term, the priors and the Jacobian c^(2 - m) enter the
// ratio (m = number of free loadings). Proposed on log sigma.
void update_eta_scale(const ModelData& md, ParamState& s, int k, const Priors& priors, AdaptiveProposal& prop,
                      Rng& rng) {
  const ModelSpec& spec = md.spec();
  if (!traits(spec.family).shared_process) return;
  std::vector<double*> loads;
  for (const auto& r : md.responses()) {
    if (r.eta_index != k) continue;
    double& g = r.response == 0 ? s.ps.gamma1 : s.ps.gamma2;
    if (spec.is_fixed(r.response == 0 ? "gamma1" : "gamma2")) {
      if (g != 0.0) return;
      continue;
    }
    loads.push_back(&g);
  }
  if (loads.empty()) return;
  auto& f = s.lgcp[static_cast<std::size_t>(k)];
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5 * std::log(f.kernel.sigma2));
  const Eigen::VectorXd xp = prop.propose(x, rng);
  const double log_u = std::log(rng.uniform_open());
  const double log_c = xp[0] - x[0];
  const double c = std::exp(log_c);
  const double sigma2_p = c * c * f.kernel.sigma2;
  bool accepted = false;
  if (log_c != 0.0 && std::isfinite(sigma2_p) && sigma2_p > 0.0) {
    const Eigen::VectorXd eta_p = c * f.eta;
    const auto& terms = md.lgcp()[static_cast<std::size_t>(k)];
    double log_ratio = -std::numeric_limits<double>::infinity();
    try {
      log_ratio = terms.loglik(f.alpha, eta_p) - terms.loglik(f.alpha, f.eta);
    } catch (const NumericalError&) {
    }
    log_ratio += inv_gamma_logpdf(sigma2_p, priors.sigma2_shape, priors.sigma2_rate) -
                 inv_gamma_logpdf(f.kernel.sigma2, priors.sigma2_shape, priors.sigma2_rate);
    for (const double* g : loads)
      log_ratio += normal_logpdf(*g / c, 0.0, priors.gamma_var) - normal_logpdf(*g, 0.0, priors.gamma_var);
    log_ratio += (2.0 - static_cast<double>(loads.size())) * log_c;
    if (std::isfinite(log_ratio) && log_u < log_ratio) {
      f.eta = eta_p;
      f.kernel.sigma2 = sigma2_p;
      for (double* g : loads) *g /= c;
      accepted = true;
    }
  }
  prop.count(accepted);
  prop.adapt(accepted, accepted ? xp : x);
}

}  // namespace

PosteriorDraws run_chain(const ModelSpec& spec, const BivariateDataset& data, std::shared_ptr<const GridApprox> grid,
                         const McmcConfig& config) {
  ModelData md(spec, data, std::move(grid));
  ParamState init = ParamState::initial(spec, md.grid().size(), md.lgcp_dim(), md.response_dim(), config.priors);
  const double area = md.grid().cell_area() * static_cast<double>(md.grid().size());
  for (std::size_t k = 0; k < init.lgcp.size(); ++k) {
    const auto n = md.lgcp()[k].points();
    if (n > 0 && init.lgcp[k].alpha.size() > 0) init.lgcp[k].alpha[0] = std::log(static_cast<double>(n) / area);
  }
  return run_chain(md, std::move(init), config);
}

PosteriorDraws run_chain(const ModelData& md, ParamState s, const McmcConfig& config) {
  config.validate();
  const ModelSpec& spec = md.spec();
  const FamilyTraits t = traits(spec.family);
  const Priors& priors = config.priors;
  const auto cells = static_cast<Eigen::Index>(md.grid().size());
  const int n_lgcp = spec.lgcp_count();

  check_initial(md, s, priors);

  const Rng root(config.seed);
  std::vector<Rng> rng_eta, rng_eta_hyper, rng_eta_center, rng_eta_scale, rng_alpha;
  for (int k = 0; k < n_lgcp; ++k) {
    const std::string sfx = std::to_string(k + 1);
    rng_eta.push_back(root.split("eta" + sfx));
    rng_eta_hyper.push_back(root.split("eta_hyper" + sfx));
    rng_eta_center.push_back(root.split("eta_center" + sfx));
    rng_eta_scale.push_back(root.split("eta_scale" + sfx));
    rng_alpha.push_back(root.split("alpha" + sfx));
  }
  Rng rng_w1 = root.split("w1"), rng_w1_hyper = root.split("w1_hyper"), rng_w1_center = root.split("w1_center");
  Rng rng_w2 = root.split("w2"), rng_w2_hyper = root.split("w2_hyper"), rng_w2_center = root.split("w2_center");
  std::vector<Rng> rng_linear{root.split("linear1"), root.split("linear2")};
  std::vector<Rng> rng_tau{root.split("tau1"), root.split("tau2")};

  const Eigen::MatrixXd dist = distance_matrix(md.grid().centroids());
  std::vector<CorrelationFactor> cur_eta(static_cast<std::size_t>(n_lgcp), CorrelationFactor(&dist));
  std::vector<CorrelationFactor> scr_eta = cur_eta;
  CorrelationFactor cur_w1(&dist), scr_w1(&dist), cur_w2(&dist), scr_w2(&dist);

  std::vector<AdaptiveProposal> prop_alpha, prop_eta, prop_eta_c, prop_eta_s;
  for (int k = 0; k < n_lgcp; ++k) {
    prop_alpha.emplace_back(
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(md.lgcp_dim()), config.step_alpha), config.target_accept);
    prop_eta.emplace_back(Eigen::VectorXd::Constant(2, config.step_hyper), config.target_accept);
    prop_eta_c.emplace_back(Eigen::VectorXd::Constant(1, config.step_hyper), config.target_accept);
    prop_eta_s.emplace_back(Eigen::VectorXd::Constant(1, config.step_scale), config.target_accept);
  }
  AdaptiveProposal prop_w1(Eigen::VectorXd::Constant(1, config.step_phi_w), config.target_accept);
  AdaptiveProposal prop_w2(Eigen::VectorXd::Constant(1, config.step_phi_w), config.target_accept);
  AdaptiveProposal prop_w1_c = prop_w1, prop_w2_c = prop_w2;
  auto all_proposals = [&](auto fn) {
    for (auto& p : prop_alpha) fn(p);
    for (auto& p : prop_eta) fn(p);
    for (auto& p : prop_eta_c) fn(p);
    for (auto& p : prop_eta_s) fn(p);
    fn(prop_w1);
    fn(prop_w2);
    fn(prop_w1_c);
    fn(prop_w2_c);
  };
  if (!config.adapt) all_proposals([](AdaptiveProposal& p) { p.freeze(); });

  PosteriorDraws out;
  out.spec = spec;
  out.lgcp_dim = md.lgcp_dim();
  out.response_dim = md.response_dim();
  out.cells = static_cast<std::size_t>(cells);
  out.names = parameter_names(spec, md.lgcp_dim(), md.response_dim());
  out.samples.resize(config.n_keep / config.thin, static_cast<Eigen::Index>(out.names.size()));

  const long rows = out.samples.rows();
  const long n_snap = std::min(config.max_latent_draws, rows);
  for (long i = 0; i < n_snap; ++i) out.latent_index.push_back(i * rows / n_snap);
  std::vector<std::string> latent_keys;
  for (int k = 0; k < n_lgcp; ++k) latent_keys.push_back("eta" + std::to_string(k + 1));
  if (t.coreg) latent_keys.push_back("w1");
  if (t.coreg && t.bivariate) latent_keys.push_back("w2");
  for (const auto& key : latent_keys) out.latent[key] = Eigen::MatrixXd(n_snap, cells);

  const long total = config.n_burn + rows * config.thin;
  const auto n_warm = static_cast<long>(config.warmup_fraction * static_cast<double>(config.n_burn));
  long row = 0;
  std::size_t snap = 0;
  for (long it = 0; it < total; ++it) {
    if (it == config.n_burn) {
      all_proposals([](AdaptiveProposal& p) {
        p.freeze();
        p.reset_counts();
      });
    }

    for (int k = 0; k < n_lgcp; ++k) {
      auto& g = s.lgcp[static_cast<std::size_t>(k)];
      const auto ku = static_cast<std::size_t>(k);
      const FieldLikelihood fl = eta_likelihood(md, s, k);
      const FieldLogLik ll = std::cref(fl);
      const Eigen::MatrixXd& lower = cur_eta[ku].lower(g.kernel.phi);
      for (int sweep = 0; sweep < config.ess_sweeps; ++sweep)
        g.eta = ess_update_field(g.eta, ll, lower, rng_eta[ku], std::sqrt(g.kernel.sigma2));
      HyperMove hm =
          update_hyperparams(g.kernel, g.eta, ll, priors, true, prop_eta[ku], cur_eta[ku], scr_eta[ku], rng_eta_hyper[ku]);
      if (hm.accepted) {
        g.kernel = hm.params;
        g.eta = std::move(hm.field);
      }
      g.kernel = update_hyperparams_centered(g.kernel, g.eta, priors, true, prop_eta_c[ku], cur_eta[ku], scr_eta[ku],
                                             rng_eta_center[ku])
                     .params;

      // Intercept and covariate coefficients of the intensity.
      const auto& terms = md.lgcp()[ku];
      auto target = [&](const Eigen::VectorXd& a) {
        double v = 0.0;
        try {
          v = terms.loglik(a, g.eta);
        } catch (const NumericalError&) {
          return -std::numeric_limits<double>::infinity();
        }
        for (Eigen::Index i = 0; i < a.size(); ++i) v += normal_logpdf(a[i], 0.0, priors.alpha_var);
        return v;
      };
      const Eigen::VectorXd ap = prop_alpha[ku].propose(g.alpha, rng_alpha[ku]);
      const double log_u = std::log(rng_alpha[ku].uniform_open());
      const bool acc = log_u < target(ap) - target(g.alpha);
      if (acc) g.alpha = ap;
      prop_alpha[ku].count(acc);
      prop_alpha[ku].adapt(acc, g.alpha);

      if (it >= n_warm) update_eta_scale(md, s, k, priors, prop_eta_s[ku], rng_eta_scale[ku]);
    }

    if (t.coreg) {
      auto update_w = [&](int which, Eigen::VectorXd& w, double& phi, CorrelationFactor& cur, CorrelationFactor& scr,
                          AdaptiveProposal& prop, AdaptiveProposal& prop_c, Rng& rng, Rng& rng_hyper,
                          Rng& rng_center) {
        const FieldLikelihood fl = w_likelihood(md, s, which);
        const FieldLogLik ll = std::cref(fl);
        const Eigen::MatrixXd& lower = cur.lower(phi);
        for (int sweep = 0; sweep < config.ess_sweeps; ++sweep) w = ess_update_field(w, ll, lower, rng);
        HyperMove hm = update_hyperparams({1.0, phi}, w, ll, priors, false, prop, cur, scr, rng_hyper);
        if (hm.accepted) {
          phi = hm.params.phi;
          w = std::move(hm.field);
        }
        phi = update_hyperparams_centered({1.0, phi}, w, priors, false, prop_c, cur, scr, rng_center).params.phi;
      };
      update_w(1, s.w1, s.phi_w1, cur_w1, scr_w1, prop_w1, prop_w1_c, rng_w1, rng_w1_hyper, rng_w1_center);
      if (t.bivariate)
        update_w(2, s.w2, s.phi_w2, cur_w2, scr_w2, prop_w2, prop_w2_c, rng_w2, rng_w2_hyper, rng_w2_center);
    }

    for (int j = 0; j < spec.response_count(); ++j)
      update_linear(md, s, j, priors, it < n_warm, rng_linear[static_cast<std::size_t>(j)]);
    apply_sign_convention(spec, s);

    for (int j = 0; j < spec.response_count(); ++j) {
      const auto& r = md.responses()[static_cast<std::size_t>(j)];
      const double ssr = (r.y - md.mean(r, s)).squaredNorm();
      const double tau2 = draw_tau2(ssr, static_cast<std::size_t>(r.y.size()), priors.tau2_shape, priors.tau2_rate,
                                    rng_tau[static_cast<std::size_t>(j)]);
      (j == 0 ? s.tau1_2 : s.tau2_2) = tau2;
    }

    if (it >= config.n_burn && (it - config.n_burn) % config.thin == config.thin - 1) {
      out.samples.row(row) = pack_state(spec, s, md.lgcp_dim(), md.response_dim()).transpose();
      if (snap < out.latent_index.size() && out.latent_index[snap] == row) {
        for (int k = 0; k < n_lgcp; ++k)
          out.latent["eta" + std::to_string(k + 1)].row(static_cast<Eigen::Index>(snap)) =
              s.lgcp[static_cast<std::size_t>(k)].eta.transpose();
        if (t.coreg) out.latent["w1"].row(static_cast<Eigen::Index>(snap)) = s.w1.transpose();
        if (t.coreg && t.bivariate) out.latent["w2"].row(static_cast<Eigen::Index>(snap)) = s.w2.transpose();
        ++snap;
      }
      ++row;
    }
  }

  for (int k = 0; k < n_lgcp; ++k) {
    const std::string sfx = lgcp_suffix(spec, k);
    out.acceptance["alpha" + sfx] = prop_alpha[static_cast<std::size_t>(k)].acceptance_rate();
    out.acceptance["eta_hyper" + sfx] = prop_eta[static_cast<std::size_t>(k)].acceptance_rate();
    out.acceptance["phi_eta_centered" + sfx] = prop_eta_c[static_cast<std::size_t>(k)].acceptance_rate();
    if (t.shared_process) out.acceptance["eta_scale" + sfx] = prop_eta_s[static_cast<std::size_t>(k)].acceptance_rate();
  }
  if (t.coreg) {
    out.acceptance["phi_w1"] = prop_w1.acceptance_rate();
    out.acceptance["phi_w1_centered"] = prop_w1_c.acceptance_rate();
  }
  if (t.coreg && t.bivariate) {
    out.acceptance["phi_w2"] = prop_w2.acceptance_rate();
    out.acceptance["phi_w2_centered"] = prop_w2_c.acceptance_rate();
  }

  for (std::size_t c = 0; c < out.names.size(); ++c) {
    const Eigen::VectorXd col = out.samples.col(static_cast<Eigen::Index>(c));
    const double e = effective_sample_size({col.data(), static_cast<std::size_t>(col.size())});
    out.ess[out.names[c]] = e;
    if (std::isfinite(e) && e < config.ess_floor)
      out.warnings.push_back("ESS of " + out.names[c] + " is " + std::to_string(static_cast<long>(e)) +
                             ", below the floor of " + std::to_string(static_cast<long>(config.ess_floor)));
  }
  return out;
}

}  // namespace prefsamp
