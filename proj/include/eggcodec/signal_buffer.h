// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_SIGNAL_BUFFER_H_
#define EGGCODEC_SIGNAL_BUFFER_H_

#include <cstddef>
#include <span>
#include <vector>

namespace eggcodec {

// Every waveform is brought to this rate on ingestion.
inline constexpr int kPipelineRate = 16000;

// Target peak for speech and reference EGG before training and inference.
inline constexpr double kNormalizedPeak = 0.95;

// Mono sampled waveform. Carries speech, EGG and dEGG alike.
struct SignalBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kPipelineRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  std::span<const double> view() const { return samples; }
};

// Throws std::invalid_argument if the rate is not positive or any sample is
// NaN/Inf.
void validate(const SignalBuffer& sig);

double rms(std::span<const double> x);
double peak_abs(std::span<const double> x);

// Scales so that max |sample| == target. Silent buffers are returned as is.
SignalBuffer peak_normalize(const SignalBuffer& sig,
                            double target = kNormalizedPeak);

}  // namespace eggcodec

#endif  // EGGCODEC_SIGNAL_BUFFER_H_
