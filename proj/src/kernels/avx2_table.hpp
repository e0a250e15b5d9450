#pragma once

#include "prefsamp/kernels.hpp"

namespace prefsamp::kernels {
// Defined in avx2.cpp, which is compiled with -mavx2 -mfma. Only call after
// a runtime CPU check.
const KernelTable& avx2_kernels() noexcept;
}  // namespace prefsamp::kernels
