// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/spectral.h"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "fft.h"

namespace eggcodec {
namespace {

using Complex = std::complex<double>;

void check_stft_args(std::size_t len, int window_len, int hop) {
  if (window_len < 32 || window_len > 1024 ||
      (window_len & (window_len - 1)) != 0) {
    throw std::invalid_argument("window_len must be a power of two in [32, 1024]");
  }
  if (hop <= 0) throw std::invalid_argument("hop must be >= 1");
  if (len <= static_cast<std::size_t>(window_len / 2)) {
    throw std::invalid_argument("signal of length " + std::to_string(len) +
                                " too short to reflect-pad window " +
                                std::to_string(window_len));
  }
}

std::vector<double> hann(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

// Index into the signal that padded position q reads from.
std::size_t reflect_index(std::ptrdiff_t q, int pad, std::size_t len) {
  std::ptrdiff_t i = q - pad;
  const auto n = static_cast<std::ptrdiff_t>(len);
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return static_cast<std::size_t>(i);
}

// Complex half spectra of every windowed frame, frames x (W/2 + 1).
struct FrameSpectra {
  int frames = 0;
  int bins = 0;
  std::vector<Complex> values;
  Complex at(int t, int k) const {
    return values[static_cast<std::size_t>(t * bins + k)];
  }
};

FrameSpectra frame_spectra(const SignalBuffer& sig, int window_len, int hop) {
  check_stft_args(sig.size(), window_len, hop);
  const int pad = window_len / 2;
  const auto window = hann(window_len);
  FrameSpectra out;
  out.frames = stft_frame_count(sig.size(), hop);
  out.bins = window_len / 2 + 1;
  out.values.resize(static_cast<std::size_t>(out.frames * out.bins));
  std::vector<Complex> buf(static_cast<std::size_t>(window_len));
  for (int t = 0; t < out.frames; ++t) {
    for (int j = 0; j < window_len; ++j) {
      const auto src = reflect_index(t * hop + j, pad, sig.size());
      buf[static_cast<std::size_t>(j)] = sig.samples[src] * window[static_cast<std::size_t>(j)];
    }
    internal::fft_inplace(buf, -1);
    for (int k = 0; k < out.bins; ++k) {
      out.values[static_cast<std::size_t>(t * out.bins + k)] = buf[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

Matrix magnitudes(const FrameSpectra& s) {
  Matrix m(s.frames, s.bins);
  for (int t = 0; t < s.frames; ++t) {
    for (int k = 0; k < s.bins; ++k) m(t, k) = std::abs(s.at(t, k));
  }
  return m;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

int stft_frame_count(std::size_t signal_len, int hop) {
  return static_cast<int>(signal_len / static_cast<std::size_t>(hop)) + 1;
}

Matrix stft_mag(const SignalBuffer& sig, int window_len, int hop) {
  validate(sig);
  return magnitudes(frame_spectra(sig, window_len, hop));
}

std::shared_ptr<const Matrix> mel_filterbank(int n_fft_bins, int n_mels,
                                             int sample_rate_hz) {
  if (n_mels < 1 || n_fft_bins < 2 || sample_rate_hz <= 0) {
    throw std::invalid_argument("mel_filterbank: need n_mels >= 1, bins >= 2");
  }
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const Matrix>> cache;
  const auto key = std::make_tuple(n_fft_bins, n_mels, sample_rate_hz);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(static_cast<std::size_t>(n_mels + 2));
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_max * i / (n_mels + 1));
  }
  const int n_fft = 2 * (n_fft_bins - 1);
  auto fb = std::make_shared<Matrix>(Matrix::Zero(n_mels, n_fft_bins));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m + 1)];
    const double hi = edges[static_cast<std::size_t>(m + 2)];
    for (int k = 0; k < n_fft_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / n_fft;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      (*fb)(m, k) = w;
    }
  }

  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(fb)).first->second;
}

MelSpectrogram log_mel(const SignalBuffer& sig, int window_len, double floor) {
  const int hop = window_len / 4;
  const Matrix mag = stft_mag(sig, window_len, hop);
  const auto fb = mel_filterbank(window_len / 2 + 1, kMelBands, sig.sample_rate_hz);
  MelSpectrogram out;
  out.window_len = window_len;
  out.hop = hop;
  out.n_mels = kMelBands;
  out.values = ((mag * fb->transpose()).array() + floor).log().matrix();
  return out;
}

std::vector<double> log_mel_backward(const SignalBuffer& sig, int window_len,
                                     const Matrix& upstream, double floor) {
  validate(sig);
  const int hop = window_len / 4;
  const FrameSpectra spec = frame_spectra(sig, window_len, hop);
  if (upstream.rows() != spec.frames || upstream.cols() != kMelBands) {
    throw std::invalid_argument("log_mel_backward: upstream shape mismatch");
  }
  const auto fb = mel_filterbank(spec.bins, kMelBands, sig.sample_rate_hz);
  const Matrix mag = magnitudes(spec);
  const Matrix mel = mag * fb->transpose();
  const Matrix g_mel = upstream.array() / (mel.array() + floor);
  const Matrix g_mag = g_mel * (*fb);

  const int pad = window_len / 2;
  const auto window = hann(window_len);
  std::vector<double> grad(sig.size(), 0.0);
  std::vector<Complex> buf(static_cast<std::size_t>(window_len));
  for (int t = 0; t < spec.frames; ++t) {
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    bool any = false;
    for (int k = 0; k < spec.bins; ++k) {
      const double m = mag(t, k);
      const double g = g_mag(t, k);
      if (m > 0.0 && g != 0.0) {
        buf[static_cast<std::size_t>(k)] = g * spec.at(t, k) / m;
        any = true;
      }
    }
    if (!any) continue;
    internal::fft_inplace(buf, +1);
    for (int j = 0; j < window_len; ++j) {
      const auto src = reflect_index(t * hop + j, pad, sig.size());
      grad[src] += buf[static_cast<std::size_t>(j)].real() * window[static_cast<std::size_t>(j)];
    }
  }
  return grad;
}

}  // namespace eggcodec
