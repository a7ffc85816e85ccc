// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_METRICS_H_
#define EGGCODEC_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eggcodec/f0_track.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

struct FramePair {
  double pred_hz;  // kUnvoiced when unvoiced
  double ref_hz;

  bool pred_voiced() const { return pred_hz > 0.0; }
  bool ref_voiced() const { return ref_hz > 0.0; }
};

struct AlignedTracks {
  std::vector<FramePair> pairs;
  std::size_t ignored_pred = 0;  // tail frames beyond the shorter track
  std::size_t ignored_ref = 0;
};

// Pairs frames up to the shorter length. Throws DataError when the hops
// differ by more than 1e-9 s.
AlignedTracks align(const F0Track& pred, const F0Track& ref);

// Each metric throws UndefinedMetricError when its frame set is empty.

// Mean |pred - ref| over frames voiced in both tracks.
double mae_hz(std::span<const FramePair> pairs);

// Percentage of ref-voiced frames where pred is voiced and within 50 cents
// (inclusive).
double rpa_50cent(std::span<const FramePair> pairs);

// Percentage of both-voiced frames with |pred - ref| / ref > 0.2 (strict).
double gpe_20(std::span<const FramePair> pairs);

// Percentage of frames whose voicing decisions differ.
double vde(std::span<const FramePair> pairs);

// Pearson correlation (population moments). Throws std::invalid_argument for
// unequal lengths or fewer than two samples and UndefinedMetricError when
// either signal is constant.
double ppmcc(std::span<const double> y1, std::span<const double> y2);
double ppmcc(const SignalBuffer& y1, const SignalBuffer& y2);

// Published reference numbers for one configuration, carried along in reports
// as context only.
struct ReferenceValues {
  std::string label;
  std::optional<double> ppmcc;
  double mae_hz;
  double rpa_pct;
  double gpe_pct;
  double vde_pct;
};

// Keys: optimal, cos, l1l2, no_time, no_freq, nda5, nda7, no_nda,
// no_gan_placeholder, unfiltered, and the baselines dio_stone, pyin, crepe,
// wav2f0.
const std::vector<std::pair<std::string, ReferenceValues>>& reference_table();
std::optional<ReferenceValues> reference_values(const std::string& key);

struct MetricReport {
  double mae_hz = 0.0;
  double rpa_pct = 0.0;
  double gpe_pct = 0.0;
  double vde_pct = 0.0;
  std::optional<double> ppmcc;
  std::size_t n_frames = 0;
  std::size_t n_both_voiced = 0;
  std::size_t n_ignored = 0;
  std::optional<ReferenceValues> reference;
};

void to_json(nlohmann::json& j, const ReferenceValues& r);
void to_json(nlohmann::json& j, const MetricReport& r);

// All track metrics, plus PPMCC when both waveforms are given (they are
// truncated to the shorter length).
MetricReport evaluate_run(const F0Track& pred_track, const F0Track& ref_track,
                          const SignalBuffer* pred_egg = nullptr,
                          const SignalBuffer* ref_egg = nullptr);

// Mean of each field over the reports (PPMCC over those that have it; counts
// are summed).
MetricReport aggregate(std::span<const MetricReport> reports);

}  // namespace eggcodec

#endif  // EGGCODEC_METRICS_H_
