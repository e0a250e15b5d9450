#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops shared by covariance assembly, the LGCP
// integral, elliptical slice proposals and CRPS. Each primitive has a
// scalar reference and, on x86-64, an AVX2+FMA variant; the active table
// is chosen once at runtime.
namespace prefsamp::kernels {

struct KernelTable {
  const char* name;
  /// out[i] = scale * exp(-rate * x[i])
  void (*exp_decay)(double scale, double rate, const double* x, double* out, std::size_t n);
  /// sum_i exp(x[i])
  double (*sum_exp)(const double* x, std::size_t n);
  /// sum_i exp(x[i] + y[i])
  double (*sum_exp2)(const double* x, const double* y, std::size_t n);
  /// sum_i |x[i] - y|
  double (*sum_abs_dev)(const double* x, std::size_t n, double y);
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// out[i] = c * a[i] + s * b[i]
  void (*axpby)(double c, const double* a, double s, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the CPU or build lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;
/// AVX2 when available unless PREFSAMP_SIMD=scalar is set in the environment.
const KernelTable& active() noexcept;

inline void exp_decay(double scale, double rate, std::span<const double> x, std::span<double> out) {
  active().exp_decay(scale, rate, x.data(), out.data(), x.size());
}
inline double sum_exp(std::span<const double> x) { return active().sum_exp(x.data(), x.size()); }
inline double sum_exp2(std::span<const double> x, std::span<const double> y) {
  return active().sum_exp2(x.data(), y.data(), x.size());
}
inline double sum_abs_dev(std::span<const double> x, double y) {
  return active().sum_abs_dev(x.data(), x.size(), y);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpby(double c, std::span<const double> a, double s, std::span<const double> b,
                  std::span<double> out) {
  active().axpby(c, a.data(), s, b.data(), out.data(), a.size());
}

}  // namespace prefsamp::kernels
