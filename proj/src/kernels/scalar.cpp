#include <cmath>

#include "prefsamp/kernels.hpp"

namespace prefsamp::kernels {
namespace {

void exp_decay(double scale, double rate, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * std::exp(-rate * x[i]);
}

double sum_exp(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i]);
  return s;
}

double sum_exp2(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] + y[i]);
  return s;
}

double sum_abs_dev(const double* x, std::size_t n, double y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y);
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpby(double c, const double* a, double s, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * a[i] + s * b[i];
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", exp_decay, sum_exp, sum_exp2, sum_abs_dev, dot, axpby};
  return table;
}

}  // namespace prefsamp::kernels
