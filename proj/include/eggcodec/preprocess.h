// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_PREPROCESS_H_
#define EGGCODEC_PREPROCESS_H_

#include <cstdint>
#include <limits>

#include "eggcodec/signal_buffer.h"

namespace eggcodec {

// "Clean" augmentation level: add_white_noise_snr returns its input untouched.
inline constexpr double kCleanSnr = std::numeric_limits<double>::infinity();

inline constexpr double kDefaultHighpassHz = 50.0;

// Normalized second-order section, a0 == 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Second-order Butterworth high-pass (bilinear transform, prewarped).
Biquad design_highpass(double cutoff_hz, int sample_rate_hz);

// Samples of odd-reflection padding used on each side by highpass_filter;
// shorter signals are passed through unfiltered.
std::size_t highpass_warmup(double cutoff_hz, int sample_rate_hz);

struct FilteredSignal {
  SignalBuffer signal;
  // True when the input was shorter than the warm-up and came back as is.
  bool skipped = false;
};

// Zero-phase high-pass: the section is run forward then backward over an
// odd-reflected, steady-state-initialized extension, so the magnitude
// response is |H|^2 (fourth order) with no phase shift.
// Throws std::invalid_argument if cutoff_hz is not in (0, Nyquist).
FilteredSignal highpass_filter(const SignalBuffer& sig,
                               double cutoff_hz = kDefaultHighpassHz);

// Adds Gaussian noise scaled so that the realized SNR over the whole buffer is
// exactly snr_db. kCleanSnr or a silent input return the input unchanged.
SignalBuffer add_white_noise_snr(const SignalBuffer& sig, double snr_db,
                                 std::uint64_t seed);

// Windowed-sinc (Kaiser, 64 taps per output sample) rate conversion. Output
// length is floor(size * target / rate). Each output is normalized by the sum
// of the taps that fall inside the signal, so DC is preserved up to the edges.
SignalBuffer resample(const SignalBuffer& sig, int target_hz);

}  // namespace eggcodec

#endif  // EGGCODEC_PREPROCESS_H_
