#include "prefsamp/predict.hpp"

#include <cmath>

#include "prefsamp/covariance.hpp"
#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

Eigen::VectorXd PredictiveDraws::mean(int response) const {
  return values.at(static_cast<std::size_t>(response)).colwise().mean().transpose();
}

Eigen::VectorXd PredictiveDraws::quantile(int response, double q) const {
  const auto& m = values.at(static_cast<std::size_t>(response));
  Eigen::VectorXd out(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::VectorXd col = m.col(c);
    out[c] = prefsamp::quantile({col.data(), static_cast<std::size_t>(col.size())}, q);
  }
  return out;
}

namespace {

// Conditional draws of a unit-correlation field at target sites given its
// grid values. The factor and V = L^{-1} R(grid, sites) are kept for the
// last phi seen, which is reused across consecutive MH-rejected draws.
class Kriger {
 public:
  Kriger(const Eigen::MatrixXd& grid_dist, const Eigen::MatrixXd& cross_dist)
      : grid_dist_(grid_dist), cross_dist_(cross_dist) {}

  Eigen::VectorXd draw(const Eigen::VectorXd& field, const ExpKernelParams& k, Rng& rng) {
    set_phi(k.phi);
    const Eigen::VectorXd white = lower_.triangularView<Eigen::Lower>().solve(field);
    Eigen::VectorXd out = v_.transpose() * white;
    for (Eigen::Index t = 0; t < out.size(); ++t) {
      const double var = k.sigma2 * std::max(0.0, 1.0 - v_norm2_[t]);
      out[t] += std::sqrt(var) * rng.normal();
    }
    return out;
  }

 private:
  void set_phi(double phi) {
    if (phi == phi_) return;
    lower_ = cov_matrix_from_distances({1.0, phi}, grid_dist_).lower;
    Eigen::MatrixXd r(cross_dist_.rows(), cross_dist_.cols());
    const auto n = static_cast<std::size_t>(r.rows());
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      kernels::exp_decay(1.0, phi, {cross_dist_.col(j).data(), n}, {r.col(j).data(), n});
    v_ = lower_.triangularView<Eigen::Lower>().solve(r);
    v_norm2_ = v_.colwise().squaredNorm().transpose();
    phi_ = phi;
  }

  const Eigen::MatrixXd& grid_dist_;
  const Eigen::MatrixXd& cross_dist_;
  double phi_ = -1.0;
  Eigen::MatrixXd lower_, v_;
  Eigen::VectorXd v_norm2_;
};

}  // namespace

PredictiveDraws predict_responses(const PosteriorDraws& draws, const BivariateDataset& test,
                                  std::shared_ptr<const GridApprox> grid, std::uint64_t seed,
                                  const PredictOptions& options) {
  if (!grid) throw InvalidArgument("prediction needs a grid");
  if (draws.latent_index.empty()) throw InvalidArgument("posterior draws carry no latent snapshots");
  if (grid->size() != draws.cells) throw InvalidArgument("grid does not match the fitted latent fields");
  test.validate();
  const ModelSpec& spec = draws.spec;
  const FamilyTraits t = traits(spec.family);
  const auto n_sites = static_cast<Eigen::Index>(test.size());
  const auto n_draws = static_cast<Eigen::Index>(draws.latent_index.size());

  PredictiveDraws out;
  out.sites = test.sites;
  out.responses = spec.response_count();
  Eigen::MatrixXd design(n_sites, static_cast<Eigen::Index>(draws.response_dim));
  std::vector<Eigen::Index> nearest(static_cast<std::size_t>(n_sites));
  for (Eigen::Index i = 0; i < n_sites; ++i) {
    design.row(i) = test.response_design(static_cast<std::size_t>(i)).transpose();
    nearest[static_cast<std::size_t>(i)] =
        static_cast<Eigen::Index>(grid->nearest_centroid(test.sites[static_cast<std::size_t>(i)]));
  }
  if (design.cols() != static_cast<Eigen::Index>(draws.response_dim))
    throw InvalidArgument("test covariates do not match the fitted design");

  const Eigen::MatrixXd grid_dist = distance_matrix(grid->centroids());
  const Eigen::MatrixXd cross_dist = distance_matrix(grid->centroids(), test.sites);

  const Rng root(seed);
  struct FieldSlot {
    std::string key;
    Kriger kriger;
    Rng rng;
  };
  std::vector<FieldSlot> slots;
  std::vector<std::string> keys;
  for (int k = 0; k < spec.lgcp_count(); ++k) keys.push_back("eta" + std::to_string(k + 1));
  if (t.coreg) keys.push_back("w1");
  if (t.coreg && t.bivariate) keys.push_back("w2");
  for (const auto& key : keys) slots.push_back({key, Kriger(grid_dist, cross_dist), root.split("krige_" + key)});
  std::array<Rng, 2> noise{root.split("noise1"), root.split("noise2")};

  for (int j = 0; j < out.responses; ++j) out.values[static_cast<std::size_t>(j)].resize(n_draws, n_sites);

  std::map<std::string, Eigen::VectorXd> at_sites;
  for (Eigen::Index m = 0; m < n_draws; ++m) {
    const ParamState s = draws.state(draws.latent_index[static_cast<std::size_t>(m)], m);
    for (auto& slot : slots) {
      const Eigen::VectorXd* field = nullptr;
      ExpKernelParams kernel;
      if (slot.key == "w1") {
        field = &s.w1;
        kernel = s.w1_kernel();
      } else if (slot.key == "w2") {
        field = &s.w2;
        kernel = s.w2_kernel();
      } else {
        const auto k = static_cast<std::size_t>(slot.key.back() - '1');
        field = &s.lgcp[k].eta;
        kernel = s.lgcp[k].kernel;
      }
      Eigen::VectorXd v(n_sites);
      if (options.latent == LatentAtSites::Kriged) {
        v = slot.kriger.draw(*field, kernel, slot.rng);
      } else {
        for (Eigen::Index i = 0; i < n_sites; ++i) v[i] = (*field)[nearest[static_cast<std::size_t>(i)]];
      }
      at_sites[slot.key] = std::move(v);
    }

    for (int j = 0; j < out.responses; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const Loadings l = loadings(spec, s, j);
      const int eta_index = spec.scenario == Scenario::Disjoint ? j : 0;
      Eigen::VectorXd y = design * s.beta(j);
      if (l.eta != 0.0) y += l.eta * at_sites.at("eta" + std::to_string(eta_index + 1));
      if (l.w1 != 0.0) y += l.w1 * at_sites.at("w1");
      if (l.w2 != 0.0) y += l.w2 * at_sites.at("w2");
      const double sd = std::sqrt(s.tau2(j));
      for (Eigen::Index i = 0; i < n_sites; ++i) {
        const double z = noise[ju].normal();
        if (options.observation_noise) y[i] += sd * z;
      }
      out.values[ju].row(m) = y.transpose();
    }
  }
  return out;
}

namespace {

Band band_of(const Eigen::MatrixXd& m) {
  Band b;
  b.mean = m.colwise().mean().transpose();
  b.lo.resize(m.cols());
  b.hi.resize(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::VectorXd col = m.col(c);
    const std::span<const double> sp{col.data(), static_cast<std::size_t>(col.size())};
    b.lo[c] = quantile(sp, 0.025);
    b.hi[c] = quantile(sp, 0.975);
  }
  return b;
}

Interval interval_of(const Eigen::VectorXd& v) {
  const std::span<const double> sp{v.data(), static_cast<std::size_t>(v.size())};
  return {v.mean(), quantile(sp, 0.025), quantile(sp, 0.975)};
}

}  // namespace

DependenceSummary dependence_summary(const PosteriorDraws& draws, std::vector<double> distances, bool include_nugget) {
  const ModelFamily f = draws.spec.family;
  if (f != ModelFamily::M3 && f != ModelFamily::M4)
    throw InvalidArgument("dependence summaries are defined for M3 and M4 only");
  if (draws.draws() == 0) throw InvalidArgument("no posterior draws");
  if (distances.empty()) throw InvalidArgument("distance grid is empty");
  for (double h : distances)
    if (h < 0.0) throw InvalidArgument("negative distance in the dependence grid");

  DependenceSummary out;
  const Eigen::Index n = draws.draws();
  const auto nh = static_cast<Eigen::Index>(distances.size());
  out.distances = std::move(distances);
  for (auto* m : {&out.cov11, &out.cov22, &out.cov21, &out.cov21_shared, &out.cov21_corr}) m->resize(n, nh);
  out.local_cov.resize(n);
  out.local_corr.resize(n);

  for (Eigen::Index r = 0; r < n; ++r) {
    const ParamState s = draws.state(r);
    const ExpKernelParams eta = s.lgcp.at(0).kernel;
    for (Eigen::Index c = 0; c < nh; ++c) {
      const CrossCovParts parts =
          cross_cov_parts(s.ps, s.coreg, eta, s.w1_kernel(), s.w2_kernel(), out.distances[static_cast<std::size_t>(c)]);
      const Eigen::Matrix2d total = parts.total();
      out.cov11(r, c) = total(0, 0);
      out.cov22(r, c) = total(1, 1);
      out.cov21_shared(r, c) = parts.shared(1, 0);
      out.cov21_corr(r, c) = parts.coreg(1, 0);
      out.cov21(r, c) = out.cov21_shared(r, c) + out.cov21_corr(r, c);
    }
    const LocalDependence local =
        local_cov_corr(s.ps, s.coreg, eta.sigma2, 1.0, 1.0, include_nugget, s.tau1_2, s.tau2_2);
    out.local_cov[r] = local.cov;
    out.local_corr[r] = local.corr;
  }
  out.cov11_band = band_of(out.cov11);
  out.cov22_band = band_of(out.cov22);
  out.cov21_band = band_of(out.cov21);
  out.cov21_shared_band = band_of(out.cov21_shared);
  out.cov21_corr_band = band_of(out.cov21_corr);
  out.local_cov_interval = interval_of(out.local_cov);
  out.local_corr_interval = interval_of(out.local_corr);
  return out;
}

}  // namespace prefsamp
