#pragma once

#include <span>
#include <vector>

namespace prefsamp {

/// Effective sample size by Geyer's initial positive sequence. NaN for a
/// constant trace, and for traces shorter than 4.
double effective_sample_size(std::span<const double> trace);

/// Linear-interpolation sample quantile (type 7). Throws on empty input.
double quantile(std::span<const double> xs, double q);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  bool covers(double v) const noexcept { return q025 <= v && v <= q975; }
};

Summary summarize(std::span<const double> trace);

}  // namespace prefsamp
