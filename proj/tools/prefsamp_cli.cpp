#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "prefsamp/csv.hpp"
#include "prefsamp/draws_io.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/experiment.hpp"

using namespace prefsamp;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> profile;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment YAML file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Root seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--profile", o.profile, "Run profile")->check(CLI::IsMember({"smoke", "paper"}));
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c = load_config(o.config, o.profile);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  c.validate();
  return c;
}

int cmd_simulate(const ExperimentConfig& c) {
  if (!c.simulate) throw InvalidArgument("simulate requires data.source: simulate");
  std::filesystem::create_directories(c.output_dir);
  const SimulatedData sim = simulate_experiment(c);
  write_dataset(c.output_dir / "data.csv", sim.data);
  write_truth(c.output_dir / "truth.yaml", c, sim);
  std::ofstream(c.output_dir / "config.resolved.yaml") << to_yaml(c);
  std::cout << "simulated " << sim.full.size() << " sites, kept " << sim.data.size() << " (n1="
            << sim.data.observed_count(0) << ", n2=" << sim.data.observed_count(1) << ") -> "
            << (c.output_dir / "data.csv").string() << "\n";
  return 0;
}

int cmd_predict(const ExperimentConfig& c, const std::string& model, const std::string& sites) {
  const std::string stem = model + "_full";
  const LoadedDraws loaded = read_draws(c.output_dir / "draws", stem);
  const BivariateDataset test = read_dataset(sites, config_covariates(c));
  const PredictiveDraws pred =
      predict_responses(loaded.draws, test, loaded.grid, Rng(c.seed).split("predict").split(stem).seed(), c.predict);
  write_predictive_draws(c.output_dir / ("predictive_" + model + ".csv"), pred);
  write_prediction_summary(c.output_dir / ("predictions_" + model + ".csv"), pred);
  std::cout << "predicted " << test.size() << " sites -> " << (c.output_dir / ("predictions_" + model + ".csv")).string()
            << "\n";
  return 0;
}

int cmd_score(const ExperimentConfig& c, const std::string& pred_path, const std::string& sites) {
  const BivariateDataset test = read_dataset(sites, config_covariates(c));
  const PredictiveDraws pred = read_predictive_draws(pred_path, test);
  const ScoreReport s = score(pred, test);
  CsvWriter w(c.output_dir / "scores_external.csv",
              {"rmse1", "rmse2", "rmse_sum", "crps1", "crps2", "crps_sum", "n1", "n2"});
  w.row({format_double(s.rmse1), format_double(s.rmse2), format_double(s.rmse_sum), format_double(s.crps1),
         format_double(s.crps2), format_double(s.crps_sum), std::to_string(s.n1), std::to_string(s.n2)});
  std::cout << "rmse1=" << s.rmse1 << " rmse2=" << s.rmse2 << " rmse_sum=" << s.rmse_sum << "\n"
            << "crps1=" << s.crps1 << " crps2=" << s.crps2 << " crps_sum=" << s.crps_sum << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate preferential sampling: simulate, fit, predict, score"};
  app.require_subcommand(1);

  CommonOptions sim_o, fit_o, pred_o, score_o, dep_o, pipe_o;
  auto* sim = app.add_subcommand("simulate", "Simulate a dataset and write data.csv and truth.yaml");
  add_common(sim, sim_o);
  auto* fit = app.add_subcommand("fit", "Fit the configured models to the full data");
  add_common(fit, fit_o);
  auto* pred = app.add_subcommand("predict", "Predict at new sites from saved draws");
  add_common(pred, pred_o);
  std::string pred_model = "M4", pred_sites;
  pred->add_option("--model", pred_model, "Model whose draws to use");
  pred->add_option("--sites", pred_sites, "Sites CSV (x, y, y1, y2[, obs1, obs2])")->required()->check(CLI::ExistingFile);
  auto* sc = app.add_subcommand("score", "Score predictive draws against observed responses");
  add_common(sc, score_o);
  std::string score_pred, score_sites;
  sc->add_option("--pred", score_pred, "Predictive draws CSV")->required()->check(CLI::ExistingFile);
  sc->add_option("--sites", score_sites, "Sites CSV with observed responses")->required()->check(CLI::ExistingFile);
  auto* dep = app.add_subcommand("dependence", "Fit the dependence models and write cross-covariance tables");
  add_common(dep, dep_o);
  auto* pipe = app.add_subcommand("pipeline", "Run every model x holdout cell and any dependence fits");
  add_common(pipe, pipe_o);

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(resolve(sim_o));
    if (fit->parsed()) return run_fit(resolve(fit_o), std::cout);
    if (pred->parsed()) return cmd_predict(resolve(pred_o), pred_model, pred_sites);
    if (sc->parsed()) return cmd_score(resolve(score_o), score_pred, score_sites);
    if (dep->parsed()) {
      ExperimentConfig c = resolve(dep_o);
      c.holdouts.clear();
      c.dependence.enabled = true;
      return run_pipeline(c, std::cout);
    }
    if (pipe->parsed()) return run_pipeline(resolve(pipe_o), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
