#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "prefsamp/config.hpp"
#include "prefsamp/gp.hpp"
#include "prefsamp/grid.hpp"
#include "prefsamp/mcmc.hpp"
#include "prefsamp/model.hpp"
#include "prefsamp/predict.hpp"
#include "prefsamp/scoring.hpp"

namespace prefsamp {

struct SimulatedData {
  BivariateDataset data;  // after any biased subsampling
  BivariateDataset full;  // every simulated site
  std::shared_ptr<const GridApprox> grid;
  std::vector<GpField> eta;  // one per point pattern
  GpField w1, w2;            // empty unless used by the truth
};

/// Simulates per config.truth using streams split from config.seed.
SimulatedData simulate_experiment(const ExperimentConfig& config);

/// Reads a point-referenced bivariate CSV: blank responses become masked,
/// coordinates are rescaled to unit diameter unless disabled.
BivariateDataset ingest_csv(const CsvSource& source);

/// Simulated or ingested data, per the config's data source.
BivariateDataset load_data(const ExperimentConfig& config);

/// Columns x, y, y1, y2, obs1, obs2 (blank responses when unobserved).
void write_dataset(const std::filesystem::path& path, const BivariateDataset& data);

/// Reads a file written by write_dataset. Coordinates are taken as already
/// rescaled; `region` is the unit square.
BivariateDataset read_dataset(const std::filesystem::path& path,
                              std::shared_ptr<const CovariateProvider> covariates);

/// Covariate provider implied by the config's data source.
std::shared_ptr<const CovariateProvider> config_covariates(const ExperimentConfig& config);

/// Truth parameters and realized counts as YAML.
void write_truth(const std::filesystem::path& path, const ExperimentConfig& config, const SimulatedData& sim);

struct ParamSummaryRow {
  std::string parameter;
  Summary summary;
};
/// Summaries of every trace plus the identifiable products sigma2*phi and
/// a^2*phi.
std::vector<ParamSummaryRow> summarize_draws(const PosteriorDraws& draws);

/// Long format: draw, site, response, value.
void write_predictive_draws(const std::filesystem::path& path, const PredictiveDraws& pred);
PredictiveDraws read_predictive_draws(const std::filesystem::path& path, const BivariateDataset& sites);
/// site, x, y, response, mean, q025, q975.
void write_prediction_summary(const std::filesystem::path& path, const PredictiveDraws& pred);

/// Column names of dependence.csv and the rows contributed by one model.
std::vector<std::string> dependence_header();
std::vector<std::vector<std::string>> dependence_rows(const std::string& model, const DependenceSummary& d);

/// Runs every (model, holdout) cell and any dependence fits, writing the
/// result tables under config.output_dir. Returns the process exit code.
int run_pipeline(const ExperimentConfig& config, std::ostream& log);

/// Fits every configured model to the full data and writes draws and
/// parameter summaries. Returns the process exit code.
int run_fit(const ExperimentConfig& config, std::ostream& log);

}  // namespace prefsamp
