#include "prefsamp/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "prefsamp/csv.hpp"
#include "prefsamp/draws_io.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/holdout.hpp"
#include "prefsamp/lgcp.hpp"

namespace prefsamp {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

SimulatedData simulate_experiment(const ExperimentConfig& config) {
  const SimulationTruth& t = config.truth;
  t.validate();
  const Rng sim = Rng(config.seed).split("simulation");
  SimulatedData out;
  auto grid = std::make_shared<GridApprox>(build_grid(Region(), t.grid_resolution));
  out.grid = grid;
  std::shared_ptr<const CovariateProvider> covars =
      t.centered_y ? std::static_pointer_cast<const CovariateProvider>(CoordinateCovariates::intercept_and_y())
                   : std::static_pointer_cast<const CovariateProvider>(CoordinateCovariates::intercept_only());
  const Eigen::VectorXd alpha = to_vector(t.alpha);
  const int n_patterns = t.design == SimulationTruth::Design::Disjoint ? 2 : 1;

  std::vector<PointPattern> patterns;
  for (int k = 0; k < n_patterns; ++k) {
    const std::string sfx = std::to_string(k + 1);
    Rng eta_rng = sim.split("eta" + sfx);
    out.eta.push_back(simulate_gp(grid, t.eta, eta_rng));
    Rng pts_rng = sim.split("points" + sfx);
    patterns.push_back(simulate_lgcp({alpha, out.eta.back()}, *covars, *grid, pts_rng));
  }
  const auto cells = static_cast<Eigen::Index>(grid->size());
  auto latent = [&](double phi, bool needed, const char* name) {
    if (!needed) return GpField{grid, Eigen::VectorXd::Zero(cells), {1.0, phi}};
    Rng rng = sim.split(name);
    return simulate_gp(grid, {1.0, phi}, rng);
  };
  out.w1 = latent(t.phi_w1, t.coreg.a11 != 0.0 || t.coreg.a21 != 0.0, "w1");
  out.w2 = latent(t.phi_w2, t.coreg.a22 != 0.0, "w2");

  std::array<Rng, 2> noise{sim.split("noise1"), sim.split("noise2")};
  const std::array<Eigen::VectorXd, 2> beta{to_vector(t.beta1), to_vector(t.beta2)};
  const std::array<double, 2> tau{std::sqrt(t.tau1_2), std::sqrt(t.tau2_2)};
  auto response = [&](int j, const Location& s, int k) {
    const auto c = static_cast<Eigen::Index>(grid->nearest_centroid(s));
    double v = covars->at(s).dot(beta[static_cast<std::size_t>(j)]);
    v += (j == 0 ? t.ps.gamma1 : t.ps.gamma2) * out.eta[static_cast<std::size_t>(k)].values[c];
    v += (j == 0 ? t.coreg.a11 : t.coreg.a21) * out.w1.values[c];
    if (j == 1) v += t.coreg.a22 * out.w2.values[c];
    return v + tau[static_cast<std::size_t>(j)] * noise[static_cast<std::size_t>(j)].normal();
  };

  BivariateDataset& d = out.full;
  d.region = Region();
  d.covariates = covars;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (n_patterns == 1) {
    for (const auto& s : patterns[0].locations) {
      d.sites.push_back(s);
      d.y1.push_back(response(0, s, 0));
      d.y2.push_back(response(1, s, 0));
      d.obs1.push_back(1);
      d.obs2.push_back(1);
    }
  } else {
    for (int k = 0; k < 2; ++k)
      for (const auto& s : patterns[static_cast<std::size_t>(k)].locations) {
        d.sites.push_back(s);
        d.y1.push_back(k == 0 ? response(0, s, 0) : nan);
        d.y2.push_back(k == 1 ? response(1, s, 1) : nan);
        d.obs1.push_back(k == 0);
        d.obs2.push_back(k == 1);
      }
  }
  out.data = t.biased_fraction < 1.0 ? biased_pair_sample(d, t.biased_fraction, t.biased_order_by) : d;
  return out;
}

BivariateDataset ingest_csv(const CsvSource& src) {
  const CsvTable table = read_csv(src.path);
  const std::string file = src.path.string();
  const std::size_t ce = table.require(src.easting), cn = table.require(src.northing);
  const std::size_t c1 = table.require(src.y1), c2 = table.require(src.y2);
  std::vector<std::size_t> cx;
  for (const auto& name : src.covariates) cx.push_back(table.require(name));
  if (table.rows.empty()) throw ParseError(file + ": no data rows");

  const auto n = table.rows.size();
  std::vector<Location> raw(n);
  BivariateDataset d;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cx.size()));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::string where = file + ":" + std::to_string(table.line[r]);
    raw[r] = {parse_double(row[ce], false, where), parse_double(row[cn], false, where)};
    double y1 = parse_double(row[c1], true, where);
    double y2 = parse_double(row[c2], true, where);
    for (auto [y, log_it, name] : {std::tuple{&y1, src.log_y1, "y1"}, std::tuple{&y2, src.log_y2, "y2"}}) {
      if (!std::isfinite(*y) && !std::isnan(*y)) throw ParseError(where + ": non-finite " + name);
      if (log_it && !std::isnan(*y)) {
        if (!(*y > 0.0)) throw ParseError(where + ": log transform of non-positive " + std::string(name));
        *y = std::log(*y);
      }
    }
    d.y1.push_back(y1);
    d.y2.push_back(y2);
    d.obs1.push_back(!std::isnan(y1));
    d.obs2.push_back(!std::isnan(y2));
    for (std::size_t k = 0; k < cx.size(); ++k)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = parse_double(row[cx[k]], false, where);
  }
  if (src.rescale) {
    Rescaling res = rescale_coordinates(raw);
    d.sites = std::move(res.points);
    d.region = res.region;
  } else {
    d.sites = raw;
    d.region = Region();
  }
  if (cx.empty()) d.covariates = CoordinateCovariates::intercept_only();
  else d.covariates = std::make_shared<TableCovariates>(d.sites, x, src.covariates);
  d.validate();
  return d;
}

BivariateDataset load_data(const ExperimentConfig& config) {
  return config.simulate ? simulate_experiment(config).data : ingest_csv(config.csv);
}

void write_dataset(const std::filesystem::path& path, const BivariateDataset& d) {
  CsvWriter w(path, {"x", "y", "y1", "y2", "obs1", "obs2"});
  for (std::size_t i = 0; i < d.size(); ++i)
    w.row({format_double(d.sites[i].x), format_double(d.sites[i].y), d.obs1[i] ? format_double(d.y1[i]) : "",
           d.obs2[i] ? format_double(d.y2[i]) : "", std::to_string(d.obs1[i]), std::to_string(d.obs2[i])});
}

BivariateDataset read_dataset(const std::filesystem::path& path,
                              std::shared_ptr<const CovariateProvider> covariates) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.require("x"), cy = t.require("y"), c1 = t.require("y1"), c2 = t.require("y2");
  const long o1 = t.find("obs1"), o2 = t.find("obs2");
  BivariateDataset d;
  d.region = Region();
  d.covariates = std::move(covariates);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.line[r]);
    d.sites.push_back({parse_double(row[cx], false, where), parse_double(row[cy], false, where)});
    const double y1 = parse_double(row[c1], true, where), y2 = parse_double(row[c2], true, where);
    const bool b1 = o1 >= 0 ? parse_double(row[static_cast<std::size_t>(o1)], false, where) != 0.0 : !std::isnan(y1);
    const bool b2 = o2 >= 0 ? parse_double(row[static_cast<std::size_t>(o2)], false, where) != 0.0 : !std::isnan(y2);
    if ((b1 && std::isnan(y1)) || (b2 && std::isnan(y2))) throw ParseError(where + ": observed response is blank");
    d.y1.push_back(b1 ? y1 : std::numeric_limits<double>::quiet_NaN());
    d.y2.push_back(b2 ? y2 : std::numeric_limits<double>::quiet_NaN());
    d.obs1.push_back(b1);
    d.obs2.push_back(b2);
  }
  d.validate();
  return d;
}

std::shared_ptr<const CovariateProvider> config_covariates(const ExperimentConfig& config) {
  if (config.simulate) {
    if (config.truth.centered_y) return CoordinateCovariates::intercept_and_y();
    return CoordinateCovariates::intercept_only();
  }
  return ingest_csv(config.csv).covariates;
}

void write_truth(const std::filesystem::path& path, const ExperimentConfig& config, const SimulatedData& sim) {
  const auto& t = config.truth;
  const LocalDependence local = local_cov_corr(t.ps, t.coreg, t.eta.sigma2, 1.0, 1.0);
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << config.seed;
  e << YAML::Key << "sites_simulated" << YAML::Value << sim.full.size();
  e << YAML::Key << "sites_kept" << YAML::Value << sim.data.size();
  e << YAML::Key << "n1" << YAML::Value << sim.data.observed_count(0);
  e << YAML::Key << "n2" << YAML::Value << sim.data.observed_count(1);
  e << YAML::Key << "alpha" << YAML::Value << YAML::Flow << t.alpha;
  e << YAML::Key << "sigma2_eta" << YAML::Value << t.eta.sigma2;
  e << YAML::Key << "phi_eta" << YAML::Value << t.eta.phi;
  e << YAML::Key << "sigma2phi_eta" << YAML::Value << t.eta.identifiable();
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
  e << YAML::Key << "local_cov" << YAML::Value << local.cov;
  e << YAML::Key << "local_corr" << YAML::Value << local.corr;
  e << YAML::EndMap;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << e.c_str() << "\n";
}

std::vector<ParamSummaryRow> summarize_draws(const PosteriorDraws& d) {
  std::vector<ParamSummaryRow> rows;
  auto add = [&](const std::string& name, const Eigen::VectorXd& v) {
    rows.push_back({name, summarize({v.data(), static_cast<std::size_t>(v.size())})});
  };
  for (const auto& name : d.names) add(name, d.trace(name));
  for (int k = 0; k < d.spec.lgcp_count(); ++k) {
    const std::string sfx = d.spec.lgcp_count() == 1 ? "" : std::to_string(k + 1);
    add("sigma2phi_eta" + sfx, d.trace("sigma2_eta" + sfx).cwiseProduct(d.trace("phi_eta" + sfx)));
  }
  if (d.has("a11")) add("a11sq_phi_w1", d.trace("a11").array().square().matrix().cwiseProduct(d.trace("phi_w1")));
  if (d.has("a22")) add("a22sq_phi_w2", d.trace("a22").array().square().matrix().cwiseProduct(d.trace("phi_w2")));
  return rows;
}

void write_predictive_draws(const std::filesystem::path& path, const PredictiveDraws& pred) {
  CsvWriter w(path, {"draw", "site", "response", "value"});
  for (int j = 0; j < pred.responses; ++j) {
    const auto& m = pred.values[static_cast<std::size_t>(j)];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        w.row({std::to_string(r), std::to_string(c), std::to_string(j + 1), format_double(m(r, c))});
  }
}

PredictiveDraws read_predictive_draws(const std::filesystem::path& path, const BivariateDataset& sites) {
  const CsvTable t = read_csv(path);
  const std::size_t cd = t.require("draw"), cs = t.require("site"), cr = t.require("response"), cv = t.require("value");
  PredictiveDraws out;
  out.sites = sites.sites;
  out.responses = 0;
  long max_draw = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(t.line[r]);
    max_draw = std::max(max_draw, static_cast<long>(parse_double(t.rows[r][cd], false, where)));
    out.responses = std::max(out.responses, static_cast<int>(parse_double(t.rows[r][cr], false, where)));
  }
  if (out.responses < 1 || out.responses > 2) throw ParseError(path.string() + ": response index must be 1 or 2");
  for (int j = 0; j < out.responses; ++j)
    out.values[static_cast<std::size_t>(j)] =
        Eigen::MatrixXd::Constant(max_draw + 1, static_cast<Eigen::Index>(sites.size()),
                                  std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(t.line[r]);
    const auto draw = static_cast<Eigen::Index>(parse_double(t.rows[r][cd], false, where));
    const auto site = static_cast<Eigen::Index>(parse_double(t.rows[r][cs], false, where));
    const int resp = static_cast<int>(parse_double(t.rows[r][cr], false, where));
    if (draw < 0 || site < 0 || site >= static_cast<Eigen::Index>(sites.size()) || resp < 1)
      throw ParseError(where + ": index out of range");
    out.values[static_cast<std::size_t>(resp - 1)](draw, site) = parse_double(t.rows[r][cv], false, where);
  }
  for (int j = 0; j < out.responses; ++j)
    if (out.values[static_cast<std::size_t>(j)].hasNaN())
      throw ParseError(path.string() + ": predictive draws are incomplete");
  return out;
}

void write_prediction_summary(const std::filesystem::path& path, const PredictiveDraws& pred) {
  CsvWriter w(path, {"site", "x", "y", "response", "mean", "q025", "q975"});
  for (int j = 0; j < pred.responses; ++j) {
    const Eigen::VectorXd mean = pred.mean(j), lo = pred.quantile(j, 0.025), hi = pred.quantile(j, 0.975);
    for (std::size_t i = 0; i < pred.sites.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      w.row({std::to_string(i), format_double(pred.sites[i].x), format_double(pred.sites[i].y), std::to_string(j + 1),
             format_double(mean[k]), format_double(lo[k]), format_double(hi[k])});
    }
  }
}

std::vector<std::string> dependence_header() {
  std::vector<std::string> h{"model", "distance"};
  for (const char* name : {"cov11", "cov22", "cov21", "cov21_shared", "cov21_corr"})
    for (const char* stat : {"_mean", "_lo", "_hi"}) h.push_back(std::string(name) + stat);
  return h;
}

std::vector<std::vector<std::string>> dependence_rows(const std::string& model, const DependenceSummary& d) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t c = 0; c < d.distances.size(); ++c) {
    const auto k = static_cast<Eigen::Index>(c);
    std::vector<std::string> row{model, format_double(d.distances[c])};
    for (const Band* b : {&d.cov11_band, &d.cov22_band, &d.cov21_band, &d.cov21_shared_band, &d.cov21_corr_band}) {
      row.push_back(format_double(b->mean[k]));
      row.push_back(format_double(b->lo[k]));
      row.push_back(format_double(b->hi[k]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct Cell {
  std::string key;
  ModelFamily model;
  int holdout = -1;        // index into config.holdouts, -1 for a full-data fit
  bool dependence = false;
};

struct CellResult {
  std::string error;
  std::optional<ScoreReport> score;
  std::vector<ParamSummaryRow> params;
  std::map<std::string, double> ess, acceptance;
  std::vector<std::string> warnings;
  std::optional<DependenceSummary> dependence;
  double seconds = 0.0;
};

std::string format_p(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

std::string cell_key(ModelFamily m, const HoldoutSpec* h) {
  if (!h) return to_string(m) + "_full";
  return to_string(m) + "_" + to_string(h->strategy) + "_p" + format_p(h->p);
}

class Log {
 public:
  explicit Log(std::ostream& os) : os_(os) {}
  void line(const std::string& s) {
    std::lock_guard<std::mutex> lock(mu_);
    os_ << s << std::endl;
  }

 private:
  std::ostream& os_;
  std::mutex mu_;
};

template <class Fn>
void run_parallel(std::size_t n, int threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (k <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct Workspace {
  const ExperimentConfig& config;
  BivariateDataset data;
  std::shared_ptr<const GridApprox> grid;
  std::vector<std::optional<HoldoutSplit>> splits;
  std::vector<std::string> split_errors;
  Rng root;
};

CellResult run_cell(const Workspace& ws, const Cell& cell) {
  CellResult res;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ExperimentConfig& c = ws.config;
    const ModelSpec spec{cell.model, c.scenario, c.response_mean, c.fixed};
    const BivariateDataset* train = &ws.data;
    const HoldoutSplit* split = nullptr;
    if (cell.holdout >= 0) {
      const auto h = static_cast<std::size_t>(cell.holdout);
      if (!ws.splits[h]) throw Error("holdout construction failed: " + ws.split_errors[h]);
      split = &*ws.splits[h];
      train = &split->train;
    }
    McmcConfig mc = c.mcmc;
    mc.seed = ws.root.split("mcmc").split(cell.key).seed();
    const PosteriorDraws draws = run_chain(spec, *train, ws.grid, mc);
    res.params = summarize_draws(draws);
    res.ess = draws.ess;
    res.acceptance = draws.acceptance;
    res.warnings = draws.warnings;
    if (c.write_traces) write_draws(c.output_dir / "draws", cell.key, draws, *ws.grid);
    if (split) {
      const PredictiveDraws pred =
          predict_responses(draws, split->test, ws.grid, ws.root.split("predict").split(cell.key).seed(), c.predict);
      res.score = score(pred, split->test);
    }
    if (cell.dependence) res.dependence = dependence_summary(draws, c.dependence.distances(), c.dependence.include_nugget);
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<std::string> summary_cells(const Summary& s) {
  return {format_double(s.mean), format_double(s.sd),   format_double(s.q025),
          format_double(s.q500), format_double(s.q975), format_double(s.ess)};
}

int execute(const ExperimentConfig& config, std::vector<Cell> cells, std::ostream& os) {
  config.validate();
  Log log(os);
  const auto& out = config.output_dir;
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out / "config.resolved.yaml");
    f << to_yaml(config);
  }

  Workspace ws{config, {}, {}, {}, {}, Rng(config.seed)};
  if (config.simulate) {
    const SimulatedData sim = simulate_experiment(config);
    write_truth(out / "truth.yaml", config, sim);
    ws.data = sim.data;
  } else {
    ws.data = ingest_csv(config.csv);
  }
  ws.data.validate_for(config.scenario == Scenario::Overlapping ? Scenario::Overlapping : config.scenario);
  write_dataset(out / "data.csv", ws.data);
  ws.grid = std::make_shared<GridApprox>(build_grid(ws.data.region, config.grid_resolution));
  log.line("data: " + std::to_string(ws.data.size()) + " sites, n1=" + std::to_string(ws.data.observed_count(0)) +
           ", n2=" + std::to_string(ws.data.observed_count(1)));

  for (std::size_t h = 0; h < config.holdouts.size(); ++h) {
    HoldoutSpec spec = config.holdouts[h];
    spec.scenario = config.scenario;
    spec.seed = ws.root.split("holdout").split(static_cast<std::uint64_t>(h)).seed();
    try {
      ws.splits.emplace_back(make_holdout(ws.data, spec));
      ws.split_errors.emplace_back();
    } catch (const std::exception& e) {
      ws.splits.emplace_back(std::nullopt);
      ws.split_errors.emplace_back(e.what());
    }
  }

  std::vector<CellResult> results(cells.size());
  run_parallel(cells.size(), config.threads, [&](std::size_t i) {
    log.line("cell " + cells[i].key + ": fitting");
    results[i] = run_cell(ws, cells[i]);
    std::ostringstream msg;
    msg << "cell " << cells[i].key << ": " << (results[i].error.empty() ? "done" : "FAILED: " + results[i].error)
        << " (" << std::fixed << std::setprecision(1) << results[i].seconds << " s)";
    log.line(msg.str());
    for (const auto& w : results[i].warnings) log.line("  warning: " + w);
  });

  bool any_holdout = false, any_dependence = false;
  for (const auto& c : cells) {
    any_holdout |= c.holdout >= 0;
    any_dependence |= c.dependence;
  }

  CsvWriter params(out / "params.csv", {"model", "strategy", "p", "parameter", "mean", "sd", "q025", "q500", "q975", "ess"});
  CsvWriter diag(out / "diagnostics.csv", {"cell", "kind", "name", "value"});
  CsvWriter errors(out / "errors.csv", {"cell", "message"});
  std::optional<CsvWriter> scores, dep, local;
  if (any_holdout)
    scores.emplace(out / "scores.csv", std::vector<std::string>{"model", "scenario", "strategy", "p", "rmse1", "rmse2",
                                                                "rmse_sum", "crps1", "crps2", "crps_sum"});
  if (any_dependence) {
    dep.emplace(out / "dependence.csv", dependence_header());
    local.emplace(out / "dependence_local.csv",
                  std::vector<std::string>{"model", "local_cov_mean", "local_cov_lo", "local_cov_hi", "local_corr_mean",
                                           "local_corr_lo", "local_corr_hi"});
  }

  int failures = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    const CellResult& r = results[i];
    const HoldoutSpec* h = cell.holdout >= 0 ? &config.holdouts[static_cast<std::size_t>(cell.holdout)] : nullptr;
    const std::string strategy = h ? to_string(h->strategy) : "full";
    const std::string p = h ? format_double(h->p) : "";
    if (!r.error.empty()) {
      ++failures;
      errors.row({cell.key, r.error});
      continue;
    }
    for (const auto& row : r.params) {
      std::vector<std::string> cells_out{to_string(cell.model), strategy, p, row.parameter};
      for (auto& s : summary_cells(row.summary)) cells_out.push_back(std::move(s));
      params.row(cells_out);
    }
    for (const auto& [name, v] : r.ess) diag.row({cell.key, "ess", name, format_double(v)});
    for (const auto& [name, v] : r.acceptance) diag.row({cell.key, "acceptance", name, format_double(v)});
    if (r.score) {
      const ScoreReport& s = *r.score;
      scores->row({to_string(cell.model), to_string(config.scenario), strategy, p, format_double(s.rmse1),
                   format_double(s.rmse2), format_double(s.rmse_sum), format_double(s.crps1), format_double(s.crps2),
                   format_double(s.crps_sum)});
    }
    if (r.dependence) {
      for (const auto& row : dependence_rows(to_string(cell.model), *r.dependence)) dep->row(row);
      const auto& d = *r.dependence;
      local->row({to_string(cell.model), format_double(d.local_cov_interval.mean), format_double(d.local_cov_interval.lo),
                  format_double(d.local_cov_interval.hi), format_double(d.local_corr_interval.mean),
                  format_double(d.local_corr_interval.lo), format_double(d.local_corr_interval.hi)});
    }
  }
  log.line(std::to_string(cells.size() - static_cast<std::size_t>(failures)) + " of " + std::to_string(cells.size()) +
           " cells succeeded; results in " + out.string());
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run_pipeline(const ExperimentConfig& config, std::ostream& log) {
  std::vector<Cell> cells;
  for (std::size_t h = 0; h < config.holdouts.size(); ++h)
    for (ModelFamily m : config.models)
      cells.push_back({cell_key(m, &config.holdouts[h]), m, static_cast<int>(h), false});
  if (config.dependence.enabled)
    for (ModelFamily m : config.dependence.models) cells.push_back({cell_key(m, nullptr), m, -1, true});
  return execute(config, std::move(cells), log);
}

int run_fit(const ExperimentConfig& config, std::ostream& log) {
  std::vector<Cell> cells;
  for (ModelFamily m : config.models) cells.push_back({cell_key(m, nullptr), m, -1, false});
  ExperimentConfig c = config;
  c.write_traces = true;
  return execute(c, std::move(cells), log);
}

}  // namespace prefsamp
