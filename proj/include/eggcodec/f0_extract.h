// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_F0_EXTRACT_H_
#define EGGCODEC_F0_EXTRACT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "eggcodec/f0_track.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

struct Peak {
  std::size_t index;
  double value;

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct PeakList {
  std::vector<Peak> maxima;
  std::vector<Peak> minima;
};

// d[n] = (x[n+1] - x[n]) * sr, one sample shorter than the input.
// Throws std::invalid_argument for fewer than two samples.
SignalBuffer degg(const SignalBuffer& egg);

// Alternating extrema scan. While looking for a maximum, the running maximum
// is emitted once the signal drops more than delta below it, and the scan
// switches to looking for a minimum (symmetrically). Running extrema only
// move on strict improvement, so ties resolve to the earliest index.
// Throws std::invalid_argument unless delta > 0.
PeakList peakdet(std::span<const double> x, double delta);
PeakList peakdet(const SignalBuffer& sig, double delta);

// Same scan with a threshold per sample; delta[i] applies at sample i.
PeakList peakdet(std::span<const double> x, std::span<const double> delta);

struct PeriodEstimate {
  double center_s;
  double f0_hz;
};

// One estimate per adjacent pair of maxima (indices into a dEGG signal),
// f0 = sr / spacing, centred between the pair. Estimates outside
// [kMinF0, kMaxF0] are dropped.
std::vector<PeriodEstimate> periods_to_f0(const PeakList& peaks, int sample_rate_hz);

// frame_count(duration_s, hop_s) frames; frame k is voiced iff some estimate
// is centred within 1.5 hops of k * hop_s and then takes the median of those
// estimates. `estimates` must be sorted by centre.
F0Track frame_f0(std::span<const PeriodEstimate> estimates, double duration_s,
                 double hop_s = kDefaultHop);

struct ExtractOptions {
  // delta[i] = max(delta_fraction * max |dEGG| within window_s centred on i,
  //                floor_fraction * max |dEGG| over the whole signal)
  double delta_fraction = 0.15;
  double window_s = 0.200;
  double floor_fraction = 0.02;
  double hop_s = kDefaultHop;
};

std::vector<double> adaptive_delta(std::span<const double> d, int sample_rate_hz,
                                   const ExtractOptions& opts = {});

// peak-normalize -> degg -> peakdet with adaptive delta -> periods_to_f0 ->
// frame_f0 over the signal's duration.
F0Track extract_f0(const SignalBuffer& egg, const ExtractOptions& opts = {});

}  // namespace eggcodec

#endif  // EGGCODEC_F0_EXTRACT_H_
