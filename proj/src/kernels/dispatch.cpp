#include <cstdlib>
#include <string_view>

#include "prefsamp/kernels.hpp"

#ifdef PREFSAMP_HAVE_AVX2
#include "avx2_table.hpp"
#endif

namespace prefsamp::kernels {

const KernelTable* avx2_table() noexcept {
#ifdef PREFSAMP_HAVE_AVX2
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("PREFSAMP_SIMD");
    if (env && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace prefsamp::kernels
