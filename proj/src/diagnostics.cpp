#include "prefsamp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prefsamp/error.hpp"
#include "prefsamp/kernels.hpp"

namespace prefsamp {

double effective_sample_size(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = trace[i] - mean;
  auto autocov = [&](std::size_t lag) {
    return kernels::dot({c.data(), n - lag}, {c.data() + lag, n - lag}) / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  // Sum consecutive pairs Gamma_m = rho_{2m} + rho_{2m+1} while positive.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw InvalidArgument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level outside [0, 1]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double h = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

Summary summarize(std::span<const double> trace) {
  if (trace.empty()) throw InvalidArgument("summary of empty trace");
  Summary out;
  double sum = 0.0;
  for (double v : trace) sum += v;
  out.mean = sum / static_cast<double>(trace.size());
  double ss = 0.0;
  for (double v : trace) ss += (v - out.mean) * (v - out.mean);
  out.sd = trace.size() > 1 ? std::sqrt(ss / static_cast<double>(trace.size() - 1)) : 0.0;
  out.q025 = quantile(trace, 0.025);
  out.q500 = quantile(trace, 0.5);
  out.q975 = quantile(trace, 0.975);
  out.ess = effective_sample_size(trace);
  return out;
}

}  // namespace prefsamp
