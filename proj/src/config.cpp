#include "prefsamp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "prefsamp/error.hpp"

namespace prefsamp {

void SimulationTruth::validate() const {
  if (grid_resolution < 1) throw InvalidArgument("simulation grid_resolution must be at least 1");
  eta.validate();
  const std::size_t p = centered_y ? 2 : 1;
  if (alpha.size() != p) throw InvalidArgument("simulation alpha must have " + std::to_string(p) + " entries");
  if (beta1.size() != p || beta2.size() != p)
    throw InvalidArgument("simulation beta1/beta2 must have " + std::to_string(p) + " entries");
  if (!(tau1_2 > 0.0) || !(tau2_2 > 0.0)) throw InvalidArgument("simulation tau2 values must be positive");
  if (!(phi_w1 > 0.0) || !(phi_w2 > 0.0)) throw InvalidArgument("simulation phi_w values must be positive");
  if (!(biased_fraction > 0.0 && biased_fraction <= 1.0)) throw InvalidArgument("biased_fraction must lie in (0, 1]");
  if (biased_order_by != 0 && biased_order_by != 1) throw InvalidArgument("biased_order_by must be 0 or 1");
  if (design == Design::Disjoint && biased_fraction < 1.0)
    throw InvalidArgument("biased subsampling needs paired responses (shared design)");
}

std::vector<double> DependenceOptions::distances() const {
  if (points < 1 || !(max_distance >= 0.0)) throw InvalidArgument("bad dependence distance grid");
  std::vector<double> h;
  for (int i = 0; i < points; ++i) h.push_back(points == 1 ? 0.0 : max_distance * i / (points - 1));
  return h;
}

void ExperimentConfig::validate() const {
  if (grid_resolution < 1) throw InvalidArgument("grid_resolution must be at least 1");
  if (threads < 1) throw InvalidArgument("threads must be at least 1");
  if (simulate) {
    truth.validate();
    if (truth.design == SimulationTruth::Design::Disjoint && scenario != Scenario::Disjoint)
      throw InvalidArgument("a disjoint simulation needs the disjoint scenario");
    if (truth.design == SimulationTruth::Design::Shared && scenario == Scenario::Disjoint)
      throw InvalidArgument("the disjoint scenario needs a disjoint simulation design");
  } else if (csv.path.empty()) {
    throw InvalidArgument("data source is csv but no path was given");
  }
  for (ModelFamily f : models) {
    ModelSpec spec{f, scenario, response_mean, fixed};
    spec.validate();
  }
  for (const auto& h : holdouts) h.validate();
  if (dependence.enabled) {
    for (ModelFamily f : dependence.models)
      if (f != ModelFamily::M3 && f != ModelFamily::M4) throw InvalidArgument("dependence models must be M3 or M4");
    if (scenario == Scenario::Disjoint) throw InvalidArgument("dependence analysis needs paired responses");
    (void)dependence.distances();
  }
  mcmc.validate();
}

void apply_profile(ExperimentConfig& config, const std::string& profile) {
  if (profile == "smoke") {
    config.mcmc.n_burn = 1000;
    config.mcmc.n_keep = 2000;
    config.mcmc.max_latent_draws = 500;
    config.grid_resolution = 15;
  } else if (profile == "paper") {
    config.mcmc.n_burn = 10000;
    config.mcmc.n_keep = 20000;
    config.mcmc.max_latent_draws = 1000;
    config.grid_resolution = 30;
  } else {
    throw InvalidArgument("unknown profile '" + profile + "' (expected smoke or paper)");
  }
  config.profile = profile;
}

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& section) {
  if (!node) return;
  if (!node.IsMap()) throw ParseError("section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in section '" + section + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) {
    try {
      out = node[key].as<T>();
    } catch (const YAML::Exception& e) {
      throw ParseError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

std::vector<ModelFamily> read_models(const YAML::Node& n) {
  std::vector<ModelFamily> out;
  for (const auto& m : n) out.push_back(parse_family(m.as<std::string>()));
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml, const std::optional<std::string>& profile) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("invalid YAML: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root,
             {"seed", "profile", "output_dir", "grid_resolution", "data", "scenario", "models", "holdouts",
              "response_mean", "fixed", "mcmc", "priors", "predict", "dependence", "threads", "write_traces"},
             "top level");

  ExperimentConfig c;
  std::string prof = c.profile;
  read(root, "profile", prof);
  if (profile) prof = *profile;
  apply_profile(c, prof);

  read(root, "seed", c.seed);
  std::string out_dir;
  read(root, "output_dir", out_dir);
  if (!out_dir.empty()) c.output_dir = out_dir;
  read(root, "grid_resolution", c.grid_resolution);
  if (root["scenario"]) c.scenario = parse_scenario(root["scenario"].as<std::string>());
  if (root["models"]) c.models = read_models(root["models"]);
  read(root, "response_mean", c.response_mean);
  read(root, "threads", c.threads);
  read(root, "write_traces", c.write_traces);
  if (root["fixed"]) {
    for (const auto& kv : root["fixed"]) c.fixed[kv.first.as<std::string>()] = kv.second.as<double>();
  }

  if (const auto data = root["data"]) {
    check_keys(data, {"source", "simulation", "csv"}, "data");
    std::string source = "simulate";
    read(data, "source", source);
    if (source == "simulate") c.simulate = true;
    else if (source == "csv") c.simulate = false;
    else throw ParseError("data.source must be 'simulate' or 'csv'");
    if (const auto s = data["simulation"]) {
      check_keys(s,
                 {"design", "grid_resolution", "covariates", "alpha", "sigma2", "phi", "beta1", "beta2", "gamma1",
                  "gamma2", "a11", "a21", "a22", "phi_w1", "phi_w2", "tau1_2", "tau2_2", "biased_fraction",
                  "biased_order_by"},
                 "data.simulation");
      auto& t = c.truth;
      std::string design = "shared";
      read(s, "design", design);
      if (design == "shared") t.design = SimulationTruth::Design::Shared;
      else if (design == "disjoint") t.design = SimulationTruth::Design::Disjoint;
      else throw ParseError("simulation design must be 'shared' or 'disjoint'");
      read(s, "grid_resolution", t.grid_resolution);
      std::string cov = "intercept_y";
      read(s, "covariates", cov);
      if (cov == "intercept_y") t.centered_y = true;
      else if (cov == "intercept") t.centered_y = false;
      else throw ParseError("simulation covariates must be 'intercept_y' or 'intercept'");
      read(s, "alpha", t.alpha);
      read(s, "sigma2", t.eta.sigma2);
      read(s, "phi", t.eta.phi);
      read(s, "beta1", t.beta1);
      read(s, "beta2", t.beta2);
      read(s, "gamma1", t.ps.gamma1);
      read(s, "gamma2", t.ps.gamma2);
      read(s, "a11", t.coreg.a11);
      read(s, "a21", t.coreg.a21);
      read(s, "a22", t.coreg.a22);
      read(s, "phi_w1", t.phi_w1);
      read(s, "phi_w2", t.phi_w2);
      read(s, "tau1_2", t.tau1_2);
      read(s, "tau2_2", t.tau2_2);
      read(s, "biased_fraction", t.biased_fraction);
      read(s, "biased_order_by", t.biased_order_by);
    }
    if (const auto s = data["csv"]) {
      check_keys(s, {"path", "easting", "northing", "y1", "y2", "covariates", "log_y1", "log_y2", "rescale"},
                 "data.csv");
      std::string path;
      read(s, "path", path);
      c.csv.path = path;
      read(s, "easting", c.csv.easting);
      read(s, "northing", c.csv.northing);
      read(s, "y1", c.csv.y1);
      read(s, "y2", c.csv.y2);
      read(s, "covariates", c.csv.covariates);
      read(s, "log_y1", c.csv.log_y1);
      read(s, "log_y2", c.csv.log_y2);
      read(s, "rescale", c.csv.rescale);
    }
  }

  if (const auto h = root["holdouts"]) {
    if (!h.IsSequence()) throw ParseError("holdouts must be a list");
    for (const auto& item : h) {
      check_keys(item, {"strategy", "p", "train_fraction"}, "holdouts");
      HoldoutSpec spec;
      std::string strategy = "random";
      read(item, "strategy", strategy);
      spec.strategy = parse_strategy(strategy);
      read(item, "p", spec.p);
      read(item, "train_fraction", spec.train_fraction);
      spec.scenario = c.scenario;
      c.holdouts.push_back(spec);
    }
  }

  if (const auto m = root["mcmc"]) {
    check_keys(m,
               {"n_burn", "n_keep", "thin", "ess_floor", "max_latent_draws", "ess_sweeps", "warmup_fraction", "adapt", "target_accept",
                "step_alpha", "step_hyper", "step_phi_w", "step_scale"},
               "mcmc");
    read(m, "n_burn", c.mcmc.n_burn);
    read(m, "n_keep", c.mcmc.n_keep);
    read(m, "thin", c.mcmc.thin);
    read(m, "ess_floor", c.mcmc.ess_floor);
    read(m, "max_latent_draws", c.mcmc.max_latent_draws);
    read(m, "ess_sweeps", c.mcmc.ess_sweeps);
    read(m, "warmup_fraction", c.mcmc.warmup_fraction);
    read(m, "adapt", c.mcmc.adapt);
    read(m, "target_accept", c.mcmc.target_accept);
    read(m, "step_alpha", c.mcmc.step_alpha);
    read(m, "step_hyper", c.mcmc.step_hyper);
    read(m, "step_phi_w", c.mcmc.step_phi_w);
    read(m, "step_scale", c.mcmc.step_scale);
  }
  if (const auto p = root["priors"]) {
    check_keys(p,
               {"alpha_var", "beta_var", "gamma_var", "coreg_var", "sigma2_shape", "sigma2_rate", "phi_min", "phi_max",
                "tau2_shape", "tau2_rate"},
               "priors");
    auto& pr = c.mcmc.priors;
    read(p, "alpha_var", pr.alpha_var);
    read(p, "beta_var", pr.beta_var);
    read(p, "gamma_var", pr.gamma_var);
    read(p, "coreg_var", pr.coreg_var);
    read(p, "sigma2_shape", pr.sigma2_shape);
    read(p, "sigma2_rate", pr.sigma2_rate);
    read(p, "phi_min", pr.phi_min);
    read(p, "phi_max", pr.phi_max);
    read(p, "tau2_shape", pr.tau2_shape);
    read(p, "tau2_rate", pr.tau2_rate);
  }
  if (const auto p = root["predict"]) {
    check_keys(p, {"latent", "observation_noise"}, "predict");
    std::string latent = "kriged";
    read(p, "latent", latent);
    if (latent == "kriged") c.predict.latent = LatentAtSites::Kriged;
    else if (latent == "nearest") c.predict.latent = LatentAtSites::Nearest;
    else throw ParseError("predict.latent must be 'kriged' or 'nearest'");
    read(p, "observation_noise", c.predict.observation_noise);
  }
  if (const auto d = root["dependence"]) {
    check_keys(d, {"enabled", "models", "max_distance", "points", "include_nugget"}, "dependence");
    read(d, "enabled", c.dependence.enabled);
    if (d["models"]) c.dependence.models = read_models(d["models"]);
    read(d, "max_distance", c.dependence.max_distance);
    read(d, "points", c.dependence.points);
    read(d, "include_nugget", c.dependence.include_nugget);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& profile) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), profile);
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "profile" << YAML::Value << c.profile;
  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string();
  e << YAML::Key << "grid_resolution" << YAML::Value << c.grid_resolution;
  e << YAML::Key << "scenario" << YAML::Value << to_string(c.scenario);
  e << YAML::Key << "models" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto m : c.models) e << to_string(m);
  e << YAML::EndSeq;
  e << YAML::Key << "response_mean" << YAML::Value << c.response_mean;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::Key << "write_traces" << YAML::Value << c.write_traces;
  e << YAML::Key << "fixed" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : c.fixed) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;

  e << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "source" << YAML::Value << (c.simulate ? "simulate" : "csv");
  const auto& t = c.truth;
  e << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "design" << YAML::Value << (t.design == SimulationTruth::Design::Shared ? "shared" : "disjoint");
  e << YAML::Key << "grid_resolution" << YAML::Value << t.grid_resolution;
  e << YAML::Key << "covariates" << YAML::Value << (t.centered_y ? "intercept_y" : "intercept");
  e << YAML::Key << "alpha" << YAML::Value << YAML::Flow << t.alpha;
  e << YAML::Key << "sigma2" << YAML::Value << t.eta.sigma2;
  e << YAML::Key << "phi" << YAML::Value << t.eta.phi;
  e << YAML::Key << "beta1" << YAML::Value << YAML::Flow << t.beta1;
  e << YAML::Key << "beta2" << YAML::Value << YAML::Flow << t.beta2;
  e << YAML::Key << "gamma1" << YAML::Value << t.ps.gamma1;
  e << YAML::Key << "gamma2" << YAML::Value << t.ps.gamma2;
  e << YAML::Key << "a11" << YAML::Value << t.coreg.a11;
  e << YAML::Key << "a21" << YAML::Value << t.coreg.a21;
  e << YAML::Key << "a22" << YAML::Value << t.coreg.a22;
  e << YAML::Key << "phi_w1" << YAML::Value << t.phi_w1;
  e << YAML::Key << "phi_w2" << YAML::Value << t.phi_w2;
  e << YAML::Key << "tau1_2" << YAML::Value << t.tau1_2;
  e << YAML::Key << "tau2_2" << YAML::Value << t.tau2_2;
  e << YAML::Key << "biased_fraction" << YAML::Value << t.biased_fraction;
  e << YAML::Key << "biased_order_by" << YAML::Value << t.biased_order_by;
  e << YAML::EndMap;
  e << YAML::Key << "csv" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "path" << YAML::Value << c.csv.path.string();
  e << YAML::Key << "easting" << YAML::Value << c.csv.easting;
  e << YAML::Key << "northing" << YAML::Value << c.csv.northing;
  e << YAML::Key << "y1" << YAML::Value << c.csv.y1;
  e << YAML::Key << "y2" << YAML::Value << c.csv.y2;
  e << YAML::Key << "covariates" << YAML::Value << YAML::Flow << c.csv.covariates;
  e << YAML::Key << "log_y1" << YAML::Value << c.csv.log_y1;
  e << YAML::Key << "log_y2" << YAML::Value << c.csv.log_y2;
  e << YAML::Key << "rescale" << YAML::Value << c.csv.rescale;
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "holdouts" << YAML::Value << YAML::BeginSeq;
  for (const auto& h : c.holdouts) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "strategy" << YAML::Value << to_string(h.strategy);
    e << YAML::Key << "p" << YAML::Value << h.p;
    e << YAML::Key << "train_fraction" << YAML::Value << h.train_fraction;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const auto& m = c.mcmc;
  e << YAML::Key << "mcmc" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_burn" << YAML::Value << m.n_burn;
  e << YAML::Key << "n_keep" << YAML::Value << m.n_keep;
  e << YAML::Key << "thin" << YAML::Value << m.thin;
  e << YAML::Key << "ess_floor" << YAML::Value << m.ess_floor;
  e << YAML::Key << "max_latent_draws" << YAML::Value << m.max_latent_draws;
  e << YAML::Key << "ess_sweeps" << YAML::Value << m.ess_sweeps;
  e << YAML::Key << "warmup_fraction" << YAML::Value << m.warmup_fraction;
  e << YAML::Key << "adapt" << YAML::Value << m.adapt;
  e << YAML::Key << "target_accept" << YAML::Value << m.target_accept;
  e << YAML::Key << "step_alpha" << YAML::Value << m.step_alpha;
  e << YAML::Key << "step_hyper" << YAML::Value << m.step_hyper;
  e << YAML::Key << "step_phi_w" << YAML::Value << m.step_phi_w;
  e << YAML::Key << "step_scale" << YAML::Value << m.step_scale;
  e << YAML::EndMap;

  const auto& p = m.priors;
  e << YAML::Key << "priors" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "alpha_var" << YAML::Value << p.alpha_var;
  e << YAML::Key << "beta_var" << YAML::Value << p.beta_var;
  e << YAML::Key << "gamma_var" << YAML::Value << p.gamma_var;
  e << YAML::Key << "coreg_var" << YAML::Value << p.coreg_var;
  e << YAML::Key << "sigma2_shape" << YAML::Value << p.sigma2_shape;
  e << YAML::Key << "sigma2_rate" << YAML::Value << p.sigma2_rate;
  e << YAML::Key << "phi_min" << YAML::Value << p.phi_min;
  e << YAML::Key << "phi_max" << YAML::Value << p.phi_max;
  e << YAML::Key << "tau2_shape" << YAML::Value << p.tau2_shape;
  e << YAML::Key << "tau2_rate" << YAML::Value << p.tau2_rate;
  e << YAML::EndMap;

  e << YAML::Key << "predict" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "latent" << YAML::Value << (c.predict.latent == LatentAtSites::Kriged ? "kriged" : "nearest");
  e << YAML::Key << "observation_noise" << YAML::Value << c.predict.observation_noise;
  e << YAML::EndMap;

  e << YAML::Key << "dependence" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << c.dependence.enabled;
  e << YAML::Key << "models" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto f : c.dependence.models) e << to_string(f);
  e << YAML::EndSeq;
  e << YAML::Key << "max_distance" << YAML::Value << c.dependence.max_distance;
  e << YAML::Key << "points" << YAML::Value << c.dependence.points;
  e << YAML::Key << "include_nugget" << YAML::Value << c.dependence.include_nugget;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace prefsamp
