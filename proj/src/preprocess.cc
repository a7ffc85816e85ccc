// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/preprocess.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace eggcodec {
namespace {

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 8.0;
constexpr double kCutoffMargin = 0.9;

// Transposed direct form II, state seeded for a steady input of `x0`.
void run_biquad(const Biquad& q, std::vector<double>& x) {
  if (x.empty()) return;
  const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
  double z2 = (q.b2 - q.a2 * gain) * x[0];
  double z1 = (q.b1 - q.a1 * gain) * x[0] + z2;
  for (double& v : x) {
    const double in = v;
    const double out = q.b0 * in + z1;
    z1 = q.b1 * in - q.a1 * out + z2;
    z2 = q.b2 * in - q.a2 * out;
    v = out;
  }
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Biquad design_highpass(double cutoff_hz, int sample_rate_hz) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  // Q = 1/sqrt(2).
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double a0 = 1.0 + alpha;
  return Biquad{(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0,
                -2.0 * cw / a0, (1.0 - alpha) / a0};
}

std::size_t highpass_warmup(double cutoff_hz, int sample_rate_hz) {
  const double tau = sample_rate_hz / (2.0 * std::numbers::pi * cutoff_hz);
  return std::max<std::size_t>(9, static_cast<std::size_t>(std::ceil(3 * tau)));
}

FilteredSignal highpass_filter(const SignalBuffer& sig, double cutoff_hz) {
  validate(sig);
  const double nyquist = sig.sample_rate_hz / 2.0;
  if (!(cutoff_hz > 0.0) || cutoff_hz >= nyquist) {
    throw std::invalid_argument("high-pass cutoff must lie in (0, Nyquist)");
  }
  const std::size_t pad = highpass_warmup(cutoff_hz, sig.sample_rate_hz);
  const std::size_t n = sig.size();
  if (n <= pad) return {sig, true};

  const auto& x = sig.samples;
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  const Biquad q = design_highpass(cutoff_hz, sig.sample_rate_hz);
  run_biquad(q, ext);
  std::reverse(ext.begin(), ext.end());
  run_biquad(q, ext);
  std::reverse(ext.begin(), ext.end());

  FilteredSignal out;
  out.signal.sample_rate_hz = sig.sample_rate_hz;
  out.signal.samples.assign(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                            ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return out;
}

SignalBuffer add_white_noise_snr(const SignalBuffer& sig, double snr_db,
                                 std::uint64_t seed) {
  validate(sig);
  if (std::isnan(snr_db)) throw std::invalid_argument("SNR is NaN");
  if (snr_db == kCleanSnr) return sig;
  const double signal_power = std::pow(rms(sig.samples), 2);
  if (signal_power == 0.0) return sig;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(sig.size());
  for (double& v : noise) v = gauss(rng);
  const double raw_power = std::pow(rms(noise), 2);
  const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale = std::sqrt(target_power / raw_power);

  SignalBuffer out = sig;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += scale * noise[i];
  return out;
}

SignalBuffer resample(const SignalBuffer& sig, int target_hz) {
  validate(sig);
  if (target_hz <= 0) throw std::invalid_argument("target rate must be > 0");
  if (target_hz == sig.sample_rate_hz) return sig;

  const std::int64_t g = std::gcd<std::int64_t>(sig.sample_rate_hz, target_hz);
  const std::int64_t src = sig.sample_rate_hz / g;
  const std::int64_t dst = target_hz / g;
  const auto n_in = static_cast<std::int64_t>(sig.size());
  const std::int64_t n_out = n_in * dst / src;
  // Cutoff in cycles per input sample, below the narrower Nyquist.
  const double fc =
      0.5 * std::min(1.0, static_cast<double>(dst) / src) * kCutoffMargin;
  const double half = kResampleTaps / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  // One row of taps per fractional phase; tap j sits at input base - 31 + j.
  std::vector<double> table(static_cast<std::size_t>(dst * kResampleTaps));
  for (std::int64_t phase = 0; phase < dst; ++phase) {
    const double frac = static_cast<double>(phase) / dst;
    for (int j = 0; j < kResampleTaps; ++j) {
      const double d = static_cast<double>(kResampleTaps / 2 - 1 - j) + frac;
      const double r = d / half;
      double h = 0.0;
      if (std::abs(r) < 1.0) {
        const double win =
            std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
            i0_beta;
        h = 2.0 * fc * sinc(2.0 * fc * d) * win;
      }
      table[static_cast<std::size_t>(phase * kResampleTaps + j)] = h;
    }
  }

  SignalBuffer out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t num = n * src;
    const std::int64_t first = num / dst - (kResampleTaps / 2 - 1);
    const double* taps = &table[static_cast<std::size_t>((num % dst) * kResampleTaps)];
    double acc = 0.0;
    double wsum = 0.0;
    for (int j = 0; j < kResampleTaps; ++j) {
      const std::int64_t k = first + j;
      if (k < 0 || k >= n_in) continue;
      acc += taps[j] * sig.samples[static_cast<std::size_t>(k)];
      wsum += taps[j];
    }
    out.samples[static_cast<std::size_t>(n)] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

}  // namespace eggcodec
