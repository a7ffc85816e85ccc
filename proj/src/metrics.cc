// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eggcodec/errors.h"

namespace eggcodec {

AlignedTracks align(const F0Track& pred, const F0Track& ref) {
  if (std::abs(pred.hop_s - ref.hop_s) > 1e-9) {
    throw DataError("hop mismatch: prediction " + std::to_string(pred.hop_s) +
                    " s, reference " + std::to_string(ref.hop_s) + " s");
  }
  AlignedTracks out;
  const std::size_t n = std::min(pred.size(), ref.size());
  out.pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.pairs.push_back({pred.f0_hz[k], ref.f0_hz[k]});
  out.ignored_pred = pred.size() - n;
  out.ignored_ref = ref.size() - n;
  return out;
}

double mae_hz(std::span<const FramePair> pairs) {
  double total = 0.0;
  std::size_t n = 0;
  for (const FramePair& p : pairs) {
    if (p.pred_voiced() && p.ref_voiced()) {
      total += std::abs(p.pred_hz - p.ref_hz);
      ++n;
    }
  }
  if (n == 0) throw UndefinedMetricError("MAE: no frame is voiced in both tracks");
  return total / static_cast<double>(n);
}

double rpa_50cent(std::span<const FramePair> pairs) {
  std::size_t hits = 0, n = 0;
  for (const FramePair& p : pairs) {
    if (!p.ref_voiced()) continue;
    ++n;
    if (p.pred_voiced() && std::abs(1200.0 * std::log2(p.pred_hz / p.ref_hz)) <= 50.0) ++hits;
  }
  if (n == 0) throw UndefinedMetricError("RPA: reference has no voiced frame");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

double gpe_20(std::span<const FramePair> pairs) {
  std::size_t gross = 0, n = 0;
  for (const FramePair& p : pairs) {
    if (!(p.pred_voiced() && p.ref_voiced())) continue;
    ++n;
    if (std::abs(p.pred_hz - p.ref_hz) / p.ref_hz > 0.2) ++gross;
  }
  if (n == 0) throw UndefinedMetricError("GPE: no frame is voiced in both tracks");
  return 100.0 * static_cast<double>(gross) / static_cast<double>(n);
}

double vde(std::span<const FramePair> pairs) {
  if (pairs.empty()) throw UndefinedMetricError("VDE: no frames");
  std::size_t errors = 0;
  for (const FramePair& p : pairs) {
    if (p.pred_voiced() != p.ref_voiced()) ++errors;
  }
  return 100.0 * static_cast<double>(errors) / static_cast<double>(pairs.size());
}

double ppmcc(std::span<const double> y1, std::span<const double> y2) {
  if (y1.size() != y2.size()) throw std::invalid_argument("ppmcc: lengths differ");
  if (y1.size() < 2) throw std::invalid_argument("ppmcc: need at least two samples");
  const double n = static_cast<double>(y1.size());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    m1 += y1[i];
    m2 += y2[i];
  }
  m1 /= n;
  m2 /= n;
  double cov = 0.0, v1 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const double a = y1[i] - m1;
    const double b = y2[i] - m2;
    cov += a * b;
    v1 += a * a;
    v2 += b * b;
  }
  if (v1 == 0.0 || v2 == 0.0) throw UndefinedMetricError("ppmcc: constant signal");
  return std::clamp(cov / std::sqrt(v1 * v2), -1.0, 1.0);
}

double ppmcc(const SignalBuffer& y1, const SignalBuffer& y2) {
  return ppmcc(y1.view(), y2.view());
}

const std::vector<std::pair<std::string, ReferenceValues>>& reference_table() {
  static const std::vector<std::pair<std::string, ReferenceValues>> table = {
      {"dio_stone", {"dio_stone", std::nullopt, 14.14, 88.1, 8.3, 8.9}},
      {"pyin", {"pYIN", std::nullopt, 36.85, 62.9, 24.3, 26.1}},
      {"crepe", {"crepe", std::nullopt, 16.10, 87.8, 8.0, 9.5}},
      {"wav2f0", {"Wav2F0", std::nullopt, 15.18, 81.8, 9.7, 8.2}},
      {"optimal", {"EGGCodec, Optimal", 0.834, 13.69, 86.0, 9.1, 5.5}},
      {"cos", {"EGGCodec, Cos", 0.818, 15.76, 85.4, 10.1, 5.9}},
      {"l1l2", {"EGGCodec, L1/L2", 0.468, 54.74, 72.9, 24.8, 23.2}},
      {"no_time", {"EGGCodec, w/o Time", 0.002, 40.30, 56.6, 35.8, 9.2}},
      {"no_freq", {"EGGCodec, w/o Freq", 0.82, 15.31, 86.5, 10.2, 6.0}},
      {"nda5", {"EGGCodec, 5dB NDA", 0.828, 16.68, 84.7, 10.9, 6.5}},
      {"no_nda", {"EGGCodec, w/o NDA", 0.819, 17.27, 84.1, 12.2, 7.4}},
      {"nda7", {"EGGCodec, 7dB NDA", 0.839, 17.41, 84.7, 11.1, 6.5}},
      {"no_gan_placeholder", {"EGGCodec, w/o GAN", 0.812, 14.17, 86.1, 9.5, 5.5}},
      {"unfiltered", {"EGGCodec, Unfiltered", 0.278, 26.71, 73.9, 19.0, 10.3}},
  };
  return table;
}

std::optional<ReferenceValues> reference_values(const std::string& key) {
  for (const auto& [k, v] : reference_table()) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const ReferenceValues& r) {
  j = nlohmann::json{{"label", r.label},
                     {"mae_hz", r.mae_hz},
                     {"rpa_pct", r.rpa_pct},
                     {"gpe_pct", r.gpe_pct},
                     {"vde_pct", r.vde_pct},
                     {"ppmcc", r.ppmcc ? nlohmann::json(*r.ppmcc) : nlohmann::json()}};
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"mae_hz", r.mae_hz},
                     {"rpa_pct", r.rpa_pct},
                     {"gpe_pct", r.gpe_pct},
                     {"vde_pct", r.vde_pct},
                     {"ppmcc", r.ppmcc ? nlohmann::json(*r.ppmcc) : nlohmann::json()},
                     {"n_frames", r.n_frames},
                     {"n_both_voiced", r.n_both_voiced},
                     {"n_ignored", r.n_ignored}};
  if (r.reference) j["reference"] = *r.reference;
}

MetricReport evaluate_run(const F0Track& pred_track, const F0Track& ref_track,
                          const SignalBuffer* pred_egg, const SignalBuffer* ref_egg) {
  const AlignedTracks a = align(pred_track, ref_track);
  MetricReport r;
  r.mae_hz = mae_hz(a.pairs);
  r.rpa_pct = rpa_50cent(a.pairs);
  r.gpe_pct = gpe_20(a.pairs);
  r.vde_pct = vde(a.pairs);
  r.n_frames = a.pairs.size();
  r.n_ignored = a.ignored_pred + a.ignored_ref;
  for (const FramePair& p : a.pairs) {
    if (p.pred_voiced() && p.ref_voiced()) ++r.n_both_voiced;
  }
  if (pred_egg != nullptr && ref_egg != nullptr) {
    const std::size_t n = std::min(pred_egg->size(), ref_egg->size());
    r.ppmcc = ppmcc(pred_egg->view().first(n), ref_egg->view().first(n));
  }
  return r;
}

MetricReport aggregate(std::span<const MetricReport> reports) {
  MetricReport out;
  if (reports.empty()) return out;
  const double n = static_cast<double>(reports.size());
  double pp = 0.0;
  std::size_t n_pp = 0;
  for (const MetricReport& r : reports) {
    out.mae_hz += r.mae_hz;
    out.rpa_pct += r.rpa_pct;
    out.gpe_pct += r.gpe_pct;
    out.vde_pct += r.vde_pct;
    out.n_frames += r.n_frames;
    out.n_both_voiced += r.n_both_voiced;
    out.n_ignored += r.n_ignored;
    if (r.ppmcc) {
      pp += *r.ppmcc;
      ++n_pp;
    }
  }
  out.mae_hz /= n;
  out.rpa_pct /= n;
  out.gpe_pct /= n;
  out.vde_pct /= n;
  if (n_pp > 0) out.ppmcc = pp / static_cast<double>(n_pp);
  return out;
}

}  // namespace eggcodec
