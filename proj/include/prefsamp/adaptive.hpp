#pragma once

#include <Eigen/Dense>

#include "prefsamp/rng.hpp"

namespace prefsamp {

/// Gaussian random-walk proposal with burn-in adaptation: a Robbins-Monro
/// log-scale toward a target acceptance rate, and (after enough history)
/// the empirical covariance of visited states as the proposal shape.
class AdaptiveProposal {
 public:
  AdaptiveProposal() = default;
  AdaptiveProposal(Eigen::VectorXd initial_step, double target = 0.3);

  Eigen::Index dim() const noexcept { return chol_.rows(); }
  Eigen::VectorXd propose(const Eigen::VectorXd& x, Rng& rng) const;

  /// Record an accept/reject outcome and the current state. No-op once frozen.
  void adapt(bool accepted, const Eigen::VectorXd& state);
  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  double acceptance_rate() const noexcept { return trials_ ? static_cast<double>(accepts_) / trials_ : 0.0; }
  void reset_counts() noexcept { trials_ = accepts_ = 0; }
  void count(bool accepted) noexcept {
    ++trials_;
    accepts_ += accepted ? 1 : 0;
  }
  double scale() const noexcept { return std::exp(log_scale_); }

 private:
  Eigen::MatrixXd chol_;
  double log_scale_ = 0.0;
  double target_ = 0.3;
  bool frozen_ = false;
  bool disabled_ = false;
  long iter_ = 0;
  long trials_ = 0, accepts_ = 0;
  long hist_n_ = 0;
  Eigen::VectorXd hist_mean_;
  Eigen::MatrixXd hist_m2_;
};

}  // namespace prefsamp
