#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "prefsamp/covariance.hpp"
#include "prefsamp/grid.hpp"
#include "prefsamp/lgcp.hpp"

namespace prefsamp {

/// How the two responses' sampling locations relate.
enum class Scenario {
  Shared,       // S1 == S2, one LGCP
  Overlapping,  // S1 != S2 but overlapping; one LGCP on the union
  Disjoint,     // S1 and S2 disjoint; two independent LGCPs
};

/// Response-model family. M1..M4 are the bivariate models for a common
/// point pattern; M1Star / M2Star are the disjoint-pattern models; Uni1..4
/// are the single-response regression / shared / geostatistical /
/// geostatistical-plus-shared models.
enum class ModelFamily { M1, M2, M3, M4, M1Star, M2Star, Uni1, Uni2, Uni3, Uni4 };

struct FamilyTraits {
  bool shared_process = false;    // responses load on the LGCP field(s)
  bool coreg = false;             // coregionalized w1 (and w2 when bivariate)
  bool bivariate = true;          // second response is modelled
};

FamilyTraits traits(ModelFamily family) noexcept;

std::string to_string(ModelFamily family);
std::string to_string(Scenario scenario);
ModelFamily parse_family(const std::string& s);
Scenario parse_scenario(const std::string& s);

/// Family x scenario plus structural options.
struct ModelSpec {
  ModelFamily family = ModelFamily::M2;
  Scenario scenario = Scenario::Shared;
  /// When false the response mean structure is fixed at zero (beta = 0).
  bool response_mean = true;
  /// Linear coefficients held fixed, by name: gamma1, gamma2, a11, a21, a22.
  std::map<std::string, double> fixed;

  void validate() const;
  int lgcp_count() const noexcept { return scenario == Scenario::Disjoint ? 2 : 1; }
  int response_count() const noexcept { return traits(family).bivariate ? 2 : 1; }
  bool is_fixed(const std::string& name) const { return fixed.count(name) > 0; }
};

/// Point-referenced bivariate data. Every site carries both response slots;
/// the observation masks say which are present. LGCP patterns are derived
/// from the masks according to the scenario.
struct BivariateDataset {
  Region region;
  std::vector<Location> sites;
  std::vector<double> y1, y2;             // NaN where unobserved
  std::vector<std::uint8_t> obs1, obs2;
  std::shared_ptr<const CovariateProvider> covariates;
  Eigen::MatrixXd response_covariates;    // optional extra response-only block (n x q)
  std::vector<std::string> response_covariate_names;

  std::size_t size() const noexcept { return sites.size(); }
  bool observed(int response, std::size_t i) const { return (response == 0 ? obs1 : obs2).at(i) != 0; }
  double y(int response, std::size_t i) const { return (response == 0 ? y1 : y2).at(i); }
  std::size_t observed_count(int response) const;

  /// Locations forming LGCP pattern `which` (0 or 1) under the scenario.
  std::vector<Location> pattern(Scenario scenario, int which = 0) const;
  /// Sub-dataset on the listed sites, in the listed order.
  BivariateDataset subset(std::span<const std::size_t> idx) const;
  /// Response design row at site i: X(s_i) followed by the extra block.
  Eigen::VectorXd response_design(std::size_t i) const;
  std::size_t response_design_dim() const;

  void validate() const;
  void validate_for(Scenario scenario) const;
};

/// Prior hyperparameters. Normal priors are zero-mean with the given
/// variance; sigma2 and tau2 are inverse-gamma(shape, rate); phi is uniform.
struct Priors {
  double alpha_var = 100.0;
  double beta_var = 100.0;
  double gamma_var = 100.0;
  double coreg_var = 100.0;
  double sigma2_shape = 2.0, sigma2_rate = 0.1;
  double phi_min = 0.0, phi_max = 100.0;
  double tau2_shape = 2.0, tau2_rate = 0.1;
};

Priors priors_default();

double normal_logpdf(double x, double mean, double var);
double inv_gamma_logpdf(double x, double shape, double rate);
double uniform_logpdf(double x, double lo, double hi);

struct LgcpState {
  Eigen::VectorXd alpha;
  ExpKernelParams kernel{0.1, 3.0};
  Eigen::VectorXd eta;
};

/// Complete parameter and latent state. Parameters outside the active
/// family stay at their null values (gamma = 0, a = 0).
struct ParamState {
  std::vector<LgcpState> lgcp;
  Eigen::VectorXd beta1, beta2;
  PSCoef ps;
  CoregCoef coreg;
  double phi_w1 = 3.0, phi_w2 = 3.0;
  double tau1_2 = 0.1, tau2_2 = 0.1;
  Eigen::VectorXd w1, w2;

  ExpKernelParams w1_kernel() const { return {1.0, phi_w1}; }
  ExpKernelParams w2_kernel() const { return {1.0, phi_w2}; }
  double gamma(int response) const { return response == 0 ? ps.gamma1 : ps.gamma2; }
  const Eigen::VectorXd& beta(int response) const { return response == 0 ? beta1 : beta2; }
  double tau2(int response) const { return response == 0 ? tau1_2 : tau2_2; }

  /// Default starting point: beta, gamma, fields at 0; variances at prior
  /// means; phi at 3; a11 = a22 = 1, a21 = 0; fixed coefficients applied.
  static ParamState initial(const ModelSpec& spec, std::size_t cells, std::size_t lgcp_dim,
                            std::size_t response_dim, const Priors& priors);
};

/// Per-response observation block precomputed for a model fit.
struct ResponseBlock {
  int response = 0;
  int eta_index = 0;                 // which LGCP field the response loads on
  std::vector<std::size_t> site;     // dataset index of each observation
  std::vector<Eigen::Index> cell;    // nearest centroid of each observation
  Eigen::VectorXd y;
  Eigen::MatrixXd x;                 // response design rows
};

/// Data arranged for repeated likelihood evaluation under one ModelSpec.
class ModelData {
 public:
  ModelData(const ModelSpec& spec, const BivariateDataset& data, std::shared_ptr<const GridApprox> grid);

  const ModelSpec& spec() const noexcept { return spec_; }
  const GridApprox& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const GridApprox>& grid_ptr() const noexcept { return grid_; }
  const std::vector<ResponseBlock>& responses() const noexcept { return responses_; }
  const std::vector<LgcpTerms>& lgcp() const noexcept { return lgcp_; }
  std::size_t lgcp_dim() const noexcept { return lgcp_dim_; }
  std::size_t response_dim() const noexcept { return response_dim_; }

  /// Mean of each observation of a response given the state.
  Eigen::VectorXd mean(const ResponseBlock& r, const ParamState& s) const;

 private:
  ModelSpec spec_;
  std::shared_ptr<const GridApprox> grid_;
  std::vector<ResponseBlock> responses_;
  std::vector<LgcpTerms> lgcp_;
  std::size_t lgcp_dim_ = 0;
  std::size_t response_dim_ = 0;
};

/// Loading of response `response` on each latent field given the state.
struct Loadings {
  double eta = 0.0;  // on the response's own LGCP field
  double w1 = 0.0;
  double w2 = 0.0;
};
Loadings loadings(const ModelSpec& spec, const ParamState& s, int response);

/// Gaussian log-likelihood of the observed responses given latent fields.
double response_loglik(const ModelData& md, const ParamState& state);
double response_loglik(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data,
                       std::shared_ptr<const GridApprox> grid);

/// Log-likelihood of the observed responses with every latent process
/// integrated out, evaluated at the exact site locations.
double marginal_response_loglik(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data);

struct PosteriorTerms {
  double lgcp = 0.0;
  double response = 0.0;
  double latent = 0.0;
  double prior = 0.0;
  double total() const noexcept { return lgcp + response + latent + prior; }
};

double log_prior(const ModelSpec& spec, const ParamState& state, const Priors& priors);
PosteriorTerms posterior_terms(const ModelData& md, const ParamState& state, const Priors& priors);
double joint_log_posterior(const ModelSpec& spec, const ParamState& state, const BivariateDataset& data,
                           std::shared_ptr<const GridApprox> grid, const Priors& priors);

}  // namespace prefsamp
