#include "prefsamp/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "prefsamp/error.hpp"

namespace prefsamp {

namespace {
constexpr long kMinHistory = 200;
constexpr long kRefreshEvery = 100;
}  // namespace

AdaptiveProposal::AdaptiveProposal(Eigen::VectorXd initial_step, double target) : target_(target) {
  if (initial_step.size() == 0) throw InvalidArgument("proposal dimension must be positive");
  if ((initial_step.array() < 0.0).any()) throw InvalidArgument("step sizes must be non-negative");
  chol_ = initial_step.asDiagonal();
  disabled_ = (initial_step.array() == 0.0).all();
  const auto d = initial_step.size();
  hist_mean_ = Eigen::VectorXd::Zero(d);
  hist_m2_ = Eigen::MatrixXd::Zero(d, d);
}

Eigen::VectorXd AdaptiveProposal::propose(const Eigen::VectorXd& x, Rng& rng) const {
  Eigen::VectorXd z(x.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  if (disabled_) return x;
  return x + std::exp(log_scale_) * (chol_ * z);
}

void AdaptiveProposal::adapt(bool accepted, const Eigen::VectorXd& state) {
  if (frozen_ || disabled_) return;
  ++iter_;
  const double gain = std::pow(static_cast<double>(iter_), -0.6);
  log_scale_ += gain * ((accepted ? 1.0 : 0.0) - target_);
  log_scale_ = std::clamp(log_scale_, -20.0, 20.0);

  ++hist_n_;
  const Eigen::VectorXd delta = state - hist_mean_;
  hist_mean_ += delta / static_cast<double>(hist_n_);
  hist_m2_ += delta * (state - hist_mean_).transpose();

  if (hist_n_ >= kMinHistory && hist_n_ % kRefreshEvery == 0) {
    const auto d = static_cast<double>(state.size());
    Eigen::MatrixXd cov = hist_m2_ / static_cast<double>(hist_n_ - 1);
    cov *= 2.38 * 2.38 / d;
    cov.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return;
    // Keep the overall proposal magnitude continuous across the switch.
    const double old_norm = (std::exp(log_scale_) * chol_).norm();
    chol_ = llt.matrixL();
    const double new_norm = chol_.norm();
    if (iter_ == kMinHistory && new_norm > 0.0) log_scale_ = std::log(old_norm / new_norm);
  }
}

}  // namespace prefsamp
