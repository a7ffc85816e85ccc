// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_SRC_FFT_H_
#define EGGCODEC_SRC_FFT_H_

#include <complex>
#include <span>

namespace eggcodec::internal {

// In-place iterative radix-2 transform; size must be a power of two.
// sign = -1 computes sum x_n e^{-2 pi i k n / N}, sign = +1 the unnormalized
// inverse.
void fft_inplace(std::span<std::complex<double>> data, int sign);

}  // namespace eggcodec::internal

#endif  // EGGCODEC_SRC_FFT_H_
