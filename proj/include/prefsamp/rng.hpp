#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace prefsamp {

/// Splittable random source. Every stochastic routine takes an explicit
/// Rng (or seed); child streams are derived deterministically from the
/// parent seed and a stream key, never from the parent's consumed state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::uint64_t stream) const;
  Rng split(std::string_view name) const;

  double uniform();           // [0, 1)
  double uniform_open();      // (0, 1)
  double normal();
  double gamma(double shape, double scale);
  /// Inverse-gamma with density proportional to x^{-shape-1} exp(-rate/x).
  double inv_gamma(double shape, double rate);
  std::uint64_t poisson(double mean);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace prefsamp
