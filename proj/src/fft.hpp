#pragma once

#include <cstddef>

#include "paraprod/grid.hpp"

namespace pp::detail {

// Unscaled complex DFT of length n; sign = -1 forward, +1 backward.
// Safe to call concurrently: plans are created under a lock and executed on
// caller-owned buffers.
void fft(const cplx* in, cplx* out, std::size_t n, int sign);

}  // namespace pp::detail
