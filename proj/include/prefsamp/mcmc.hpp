#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prefsamp/covariance.hpp"
#include "prefsamp/model.hpp"
#include "prefsamp/rng.hpp"

namespace prefsamp {

struct McmcConfig {
  long n_burn = 10000;
  long n_keep = 20000;
  long thin = 1;
  std::uint64_t seed = 1;
  double ess_floor = 200.0;
  /// Latent-field snapshots retained, evenly spaced over the kept draws (0 = none).
  long max_latent_draws = 1000;
  /// Elliptical slice moves per latent field per iteration.
  int ess_sweeps = 1;
  /// Leading fraction of burn-in during which the shared-process loadings
  /// stay at their initial zero, so the latent fields first settle on the
  /// point patterns.
  double warmup_fraction = 0.1;
  bool adapt = true;
  double target_accept = 0.3;
  double step_alpha = 0.02;
  double step_hyper = 0.3;   // on (log sigma2, logit phi)
  double step_phi_w = 0.3;   // on logit phi for the coregionalization fields
  double step_scale = 0.1;   // on log sigma for the joint eta / gamma rescaling
  Priors priors;

  void validate() const;
};

/// Kept draws of every scalar parameter plus thinned latent snapshots.
struct PosteriorDraws {
  ModelSpec spec;
  std::size_t lgcp_dim = 0;
  std::size_t response_dim = 0;
  std::size_t cells = 0;
  std::vector<std::string> names;
  Eigen::MatrixXd samples;                 // rows = kept draws, cols = names
  std::map<std::string, double> ess;
  std::map<std::string, double> acceptance;
  std::vector<long> latent_index;          // kept-draw row of each snapshot
  std::map<std::string, Eigen::MatrixXd> latent;  // rows = snapshots, cols = cells
  std::vector<std::string> warnings;

  long draws() const noexcept { return samples.rows(); }
  bool has(const std::string& name) const;
  Eigen::Index column(const std::string& name) const;
  Eigen::VectorXd trace(const std::string& name) const;
  /// Full state of kept draw `row`; latent fields filled when `snapshot` >= 0.
  ParamState state(long row, long snapshot = -1) const;
};

/// Scalar parameter names recorded for a spec.
std::vector<std::string> parameter_names(const ModelSpec& spec, std::size_t lgcp_dim, std::size_t response_dim);
Eigen::VectorXd pack_state(const ModelSpec& spec, const ParamState& s, std::size_t lgcp_dim,
                           std::size_t response_dim);
void unpack_state(const ModelSpec& spec, const Eigen::VectorXd& v, std::size_t lgcp_dim, std::size_t response_dim,
                  ParamState& s);

/// Field log-likelihood of the form
///   linear . f - 0.5 sum quad_c f_c^2 - area * sum exp(offset_c + f_c)
/// which covers both the LGCP term and Gaussian response terms once the
/// other parameters are held fixed.
struct FieldLikelihood {
  Eigen::VectorXd linear;
  Eigen::VectorXd quad;
  Eigen::VectorXd offset;  // empty when there is no intensity term
  double area = 0.0;

  explicit FieldLikelihood(Eigen::Index cells = 0);
  double operator()(const Eigen::VectorXd& f) const;
};

/// Field likelihoods given the rest of the state.
FieldLikelihood eta_likelihood(const ModelData& md, const ParamState& s, int k);
FieldLikelihood w_likelihood(const ModelData& md, const ParamState& s, int which);

/// One elliptical slice move. `lower` is the prior Cholesky factor.
using FieldLogLik = std::function<double(const Eigen::VectorXd&)>;
/// The prior covariance is (scale^2) L L^T.
Eigen::VectorXd ess_update_field(const Eigen::VectorXd& field, const FieldLogLik& loglik,
                                 const Eigen::MatrixXd& lower, Rng& rng, double scale = 1.0);

/// Cholesky factor of the unit-variance exponential correlation on a fixed
/// distance matrix, memoised on phi.
class CorrelationFactor {
 public:
  explicit CorrelationFactor(const Eigen::MatrixXd* dist = nullptr) : dist_(dist) {}
  const Eigen::MatrixXd& lower(double phi);

 private:
  const Eigen::MatrixXd* dist_;
  double phi_ = -1.0;
  Eigen::MatrixXd lower_;
};

/// Whitened hyperparameter move. The field is held at z = L^{-1} f / sqrt(sigma2),
/// (log sigma2, logit phi) proposed by the random walk, and the move accepted
/// on the joint density. When `update_sigma2` is false sigma2 stays at 1 and
/// only phi moves. Returns whether the move was accepted.
struct HyperMove {
  ExpKernelParams params;
  Eigen::VectorXd field;
  bool accepted = false;
};
class AdaptiveProposal;
HyperMove update_hyperparams(const ExpKernelParams& params, const Eigen::VectorXd& field, const FieldLogLik& loglik,
                             const Priors& priors, bool update_sigma2, AdaptiveProposal& proposal,
                             CorrelationFactor& current, CorrelationFactor& scratch, Rng& rng);

/// Centered move with the field held fixed: sigma2 from its inverse-gamma
/// full conditional (when `update_sigma2`), then phi by a logit-scale random
/// walk on the GP prior density of the field. `phi_proposal` is 1-D.
struct CenteredMove {
  ExpKernelParams params;
  bool phi_accepted = false;
};
CenteredMove update_hyperparams_centered(const ExpKernelParams& params, const Eigen::VectorXd& field,
                                         const Priors& priors, bool update_sigma2, AdaptiveProposal& phi_proposal,
                                         CorrelationFactor& current, CorrelationFactor& scratch, Rng& rng);

/// Exact draw from the Gaussian full conditional of linear coefficients.
Eigen::VectorXd gibbs_linear_block(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, double tau2,
                                   const Eigen::VectorXd& prior_var, Rng& rng);
double draw_tau2(double ssr, std::size_t n, double shape, double rate, Rng& rng);

PosteriorDraws run_chain(const ModelSpec& spec, const BivariateDataset& data, std::shared_ptr<const GridApprox> grid,
                         const McmcConfig& config);
/// Variant starting from a caller-supplied state.
PosteriorDraws run_chain(const ModelData& md, ParamState init, const McmcConfig& config);

}  // namespace prefsamp
