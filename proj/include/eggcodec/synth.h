// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_SYNTH_H_
#define EGGCODEC_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "eggcodec/f0_track.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

struct ContourPoint {
  double time_s;
  double f0_hz;
};

struct VoicedInterval {
  double start_s;
  double end_s;
};

// Recipe for one synthetic (EGG, speech, F0 truth) triplet.
struct SynthSpec {
  // Piecewise-linear, held constant before the first and after the last point.
  std::vector<ContourPoint> f0_contour;
  double duration_s = 1.0;
  int sample_rate_hz = kPipelineRate;
  std::vector<VoicedInterval> voicing_mask;
  // Standard deviation of the white noise added to the speech signal.
  double noise_floor = 0.0;

  double f0_at(double t) const;
};

// Throws std::invalid_argument on a contour outside [50, 600] Hz, overlapping
// or out-of-range intervals, or a non-positive duration/rate.
void validate(const SynthSpec& spec);

struct SynthUtterance {
  SignalBuffer egg;
  SignalBuffer audio;
  F0Track truth;
  // Sample index of every glottal closure (the steepest point of each rising
  // EGG edge).
  std::vector<std::size_t> closures;
};

// Glottal-pulse EGG whose closures follow the integrated contour: each cycle
// is a short sinusoidal rise (15% of the period, centred on the closure) and
// a long cosine fall, so dEGG has one dominant positive peak per cycle.
// Phase restarts at every voiced interval and the last cycle is completed up
// to its mid-opening zero crossing. Speech is the EGG through two fixed
// resonators (500 Hz and 1500 Hz), peak-normalized to 0.9, plus noise_floor
// white noise. Truth holds the contour at 10 ms frames inside the voicing
// mask and is unvoiced elsewhere.
SynthUtterance synth_corpus(const SynthSpec& spec, std::uint64_t seed);

// Ranges for drawing random specs (cmd_synth).
struct SynthRanges {
  int sample_rate_hz = kPipelineRate;
  double min_duration_s = 1.0;
  double max_duration_s = 2.0;
  double min_f0_hz = 80.0;
  double max_f0_hz = 300.0;
  // Probability that an utterance glides linearly between two F0 values.
  double glide_probability = 0.4;
  // Probability of one interior unvoiced gap covering gap_fraction of the
  // utterance.
  double gap_probability = 0.5;
  double gap_fraction = 0.2;
  double noise_floor = 1e-3;

  friend bool operator==(const SynthRanges&, const SynthRanges&) = default;
};

SynthSpec random_synth_spec(const SynthRanges& ranges, std::uint64_t seed);

// Per-item seed derivation shared by corpus generation and training.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace eggcodec

#endif  // EGGCODEC_SYNTH_H_
