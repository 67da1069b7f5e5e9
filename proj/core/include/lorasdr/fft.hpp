#pragma once

#include "lorasdr/core.hpp"

namespace lorasdr {

/// In-place unnormalized forward DFT, X_k = sum_n x[n] exp(-j2pi kn/N).
/// Length must be a power of two.
void fft_inplace(std::span<cplx> data);

/// In-place inverse DFT scaled by 1/N.
void ifft_inplace(std::span<cplx> data);

/// O(N^2) reference DFT for any length.
std::vector<cplx> naive_dft(std::span<const cplx> data);

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace lorasdr
