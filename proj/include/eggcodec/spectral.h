// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_SPECTRAL_H_
#define EGGCODEC_SPECTRAL_H_

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "eggcodec/signal_buffer.h"

namespace eggcodec {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kMelBands = 64;
inline constexpr double kLogFloor = 1e-5;

// frames x n_mels natural-log mel energies at one STFT scale.
struct MelSpectrogram {
  Matrix values;
  int window_len = 0;
  int hop = 0;
  int n_mels = kMelBands;
};

// Number of centred frames for a signal: floor(len / hop) + 1.
int stft_frame_count(std::size_t signal_len, int hop);

// Hann-windowed (periodic) magnitude STFT with reflect padding of
// window_len/2 on both sides. Returns frames x (window_len/2 + 1).
// Throws std::invalid_argument unless window_len is a power of two in
// [32, 1024], hop >= 1 and the signal is longer than window_len/2.
Matrix stft_mag(const SignalBuffer& sig, int window_len, int hop);

// n_mels triangular filters equally spaced on mel(f) = 2595 log10(1 + f/700)
// from 0 Hz to Nyquist, unit peak, no area normalization. The result is
// cached per (bins, mels, rate) and shared between callers.
std::shared_ptr<const Matrix> mel_filterbank(int n_fft_bins, int n_mels,
                                             int sample_rate_hz);

// ln(mel_filterbank * stft_mag + floor) with hop = window_len / 4 and 64
// bands.
MelSpectrogram log_mel(const SignalBuffer& sig, int window_len,
                       double floor = kLogFloor);

// Gradient of sum(upstream .* log_mel(sig, window_len)) with respect to the
// samples of sig, through the log, mel projection, magnitude, windowed DFT
// and reflect padding. Bins with zero magnitude contribute no gradient.
std::vector<double> log_mel_backward(const SignalBuffer& sig, int window_len,
                                     const Matrix& upstream,
                                     double floor = kLogFloor);

}  // namespace eggcodec

#endif  // EGGCODEC_SPECTRAL_H_
