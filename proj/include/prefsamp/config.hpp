#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefsamp/covariance.hpp"
#include "prefsamp/holdout.hpp"
#include "prefsamp/mcmc.hpp"
#include "prefsamp/model.hpp"
#include "prefsamp/predict.hpp"

namespace prefsamp {

/// Generative parameters for simulated data.
struct SimulationTruth {
  enum class Design { Shared, Disjoint };
  Design design = Design::Shared;
  int grid_resolution = 30;
  bool centered_y = true;              // covariates (1, s_y - 0.5); false = intercept only
  std::vector<double> alpha{6.0, 1.0};
  ExpKernelParams eta{1.0 / 3.0, 3.0};
  std::vector<double> beta1{0.0, 0.5};
  std::vector<double> beta2{0.0, 0.5};
  PSCoef ps{1.0, 0.3};
  CoregCoef coreg{0.0, 0.0, 0.0};
  double phi_w1 = 1.0, phi_w2 = 1.0;
  double tau1_2 = 0.3, tau2_2 = 0.1;
  /// Fraction kept by descending-order subsampling after simulation (1 = all).
  double biased_fraction = 1.0;
  int biased_order_by = 0;

  void validate() const;
};

struct CsvSource {
  std::filesystem::path path;
  std::string easting = "easting";
  std::string northing = "northing";
  std::string y1 = "y1";
  std::string y2 = "y2";
  std::vector<std::string> covariates;
  bool log_y1 = false, log_y2 = false;
  /// When false the coordinates are taken as already lying in the unit square.
  bool rescale = true;
};

struct DependenceOptions {
  bool enabled = false;
  std::vector<ModelFamily> models{ModelFamily::M3, ModelFamily::M4};
  double max_distance = 1.0;
  int points = 21;
  bool include_nugget = false;

  std::vector<double> distances() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string profile = "smoke";
  std::filesystem::path output_dir = "results";
  int grid_resolution = 15;           // fitting grid, cells per axis
  bool simulate = true;
  SimulationTruth truth;
  CsvSource csv;
  Scenario scenario = Scenario::Shared;
  std::vector<ModelFamily> models{ModelFamily::M1, ModelFamily::M2, ModelFamily::M3, ModelFamily::M4};
  std::vector<HoldoutSpec> holdouts;
  bool response_mean = true;
  std::map<std::string, double> fixed;
  McmcConfig mcmc;
  PredictOptions predict;
  DependenceOptions dependence;
  int threads = 1;
  bool write_traces = true;

  void validate() const;
};

/// Iteration counts and grid size for a named profile: "smoke" or "paper".
void apply_profile(ExperimentConfig& config, const std::string& profile);

/// Parses YAML text. `profile` (when set) overrides the file's profile key;
/// the profile supplies defaults which explicit keys then override.
ExperimentConfig parse_config(const std::string& yaml, const std::optional<std::string>& profile = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& profile = {});
/// Fully resolved config as YAML (every key explicit).
std::string to_yaml(const ExperimentConfig& config);

}  // namespace prefsamp
