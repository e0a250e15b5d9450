#include <doctest.h>

#include <filesystem>

#include "prefsamp/config.hpp"
#include "prefsamp/error.hpp"

using namespace prefsamp;

TEST_CASE("defaults and profiles") {
  const ExperimentConfig smoke = parse_config("");
  CHECK(smoke.profile == "smoke");
  CHECK(smoke.mcmc.n_burn == 1000);
  CHECK(smoke.mcmc.n_keep == 2000);
  CHECK(smoke.grid_resolution == 15);
  CHECK(smoke.truth.grid_resolution == 30);
  CHECK(smoke.truth.ps.gamma1 == 1.0);
  CHECK(smoke.truth.ps.gamma2 == 0.3);
  CHECK(smoke.truth.tau1_2 == 0.3);
  CHECK(smoke.truth.tau2_2 == 0.1);
  CHECK(smoke.mcmc.priors.sigma2_shape == 2.0);
  CHECK(smoke.mcmc.priors.phi_max == 100.0);

  const ExperimentConfig paper = parse_config("profile: paper\n");
  CHECK(paper.mcmc.n_burn == 10000);
  CHECK(paper.mcmc.n_keep == 20000);
  CHECK(paper.grid_resolution == 30);

  // explicit keys override the profile; the override profile beats the file
  const ExperimentConfig mixed = parse_config("profile: paper\nmcmc: {n_keep: 50}\n", std::string("smoke"));
  CHECK(mixed.profile == "smoke");
  CHECK(mixed.mcmc.n_burn == 1000);
  CHECK(mixed.mcmc.n_keep == 50);
  CHECK_THROWS_AS(parse_config("profile: huge\n"), InvalidArgument);
}

TEST_CASE("round trip through YAML") {
  const std::string text = R"(
seed: 99
scenario: overlapping
models: [M2, M4]
fixed: {gamma2: 0.0}
holdouts:
  - {strategy: desc_y2, p: 0.35}
data:
  source: simulate
  simulation: {gamma1: 0.5, a21: -0.4, a11: 1.0, a22: 1.0, biased_fraction: 0.7}
mcmc: {n_burn: 10, n_keep: 20, ess_sweeps: 2, warmup_fraction: 0.2}
priors: {tau2_rate: 0.2}
predict: {latent: nearest, observation_noise: false}
dependence: {enabled: true, points: 5}
)";
  const ExperimentConfig a = parse_config(text);
  CHECK(a.seed == 99);
  CHECK(a.scenario == Scenario::Overlapping);
  CHECK(a.models == std::vector<ModelFamily>{ModelFamily::M2, ModelFamily::M4});
  CHECK(a.fixed.at("gamma2") == 0.0);
  REQUIRE(a.holdouts.size() == 1);
  CHECK(a.holdouts[0].strategy == HoldoutStrategy::DescendingY2);
  CHECK(a.holdouts[0].scenario == Scenario::Overlapping);
  CHECK(a.truth.coreg.a21 == -0.4);
  CHECK(a.mcmc.ess_sweeps == 2);
  CHECK(a.mcmc.priors.tau2_rate == 0.2);
  CHECK(a.predict.latent == LatentAtSites::Nearest);
  CHECK(a.dependence.distances().size() == 5);

  const std::string yaml = to_yaml(a);
  const ExperimentConfig b = parse_config(yaml);
  CHECK(to_yaml(b) == yaml);
  CHECK(b.truth.eta.sigma2 == a.truth.eta.sigma2);
  CHECK(b.mcmc.warmup_fraction == 0.2);
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(parse_config("sede: 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("mcmc: {n_brun: 1}\n"), ParseError);
  CHECK_THROWS_AS(parse_config("data: {simulation: {gama1: 1}}\n"), ParseError);
  CHECK_THROWS_AS(parse_config("seed: [1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("seed: abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config("holdouts: {strategy: random}\n"), ParseError);
  CHECK_THROWS_AS(parse_config("data: {source: web}\n"), ParseError);
  CHECK_THROWS_AS(parse_config("models: [M9]\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("holdouts: [{strategy: random, p: 0.7}]\n"), InvalidArgument);
  // star families need the disjoint scenario
  CHECK_THROWS(parse_config("models: [M2star]\n"));
  CHECK_THROWS(parse_config("data: {source: csv}\n"));
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ParseError);
}

TEST_CASE("shipped configs parse") {
  const std::filesystem::path dir = PREFSAMP_SOURCE_DIR "/configs";
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".yaml") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
    ++n;
  }
  CHECK(n >= 5);
}
