// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/signal_buffer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eggcodec {

void validate(const SignalBuffer& sig) {
  if (sig.sample_rate_hz <= 0) {
    throw std::invalid_argument("sample rate must be positive");
  }
  for (double v : sig.samples) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("signal contains a non-finite sample");
    }
  }
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

SignalBuffer peak_normalize(const SignalBuffer& sig, double target) {
  const double peak = peak_abs(sig.samples);
  SignalBuffer out = sig;
  if (peak == 0.0) return out;
  const double gain = target / peak;
  for (double& v : out.samples) v *= gain;
  return out;
}

}  // namespace eggcodec
