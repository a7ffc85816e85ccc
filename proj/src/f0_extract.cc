// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/f0_extract.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace eggcodec {
namespace {

template <typename DeltaAt>
PeakList scan(std::span<const double> x, DeltaAt delta_at) {
  PeakList out;
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  std::size_t mx_pos = 0, mn_pos = 0;
  bool look_for_max = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double delta = delta_at(i);
    if (v > mx) {
      mx = v;
      mx_pos = i;
    }
    if (v < mn) {
      mn = v;
      mn_pos = i;
    }
    if (look_for_max) {
      if (v < mx - delta) {
        out.maxima.push_back({mx_pos, mx});
        mn = v;
        mn_pos = i;
        look_for_max = false;
      }
    } else if (v > mn + delta) {
      out.minima.push_back({mn_pos, mn});
      mx = v;
      mx_pos = i;
      look_for_max = true;
    }
  }
  return out;
}

}  // namespace

SignalBuffer degg(const SignalBuffer& egg) {
  if (egg.size() < 2) throw std::invalid_argument("degg needs at least two samples");
  SignalBuffer d{std::vector<double>(egg.size() - 1), egg.sample_rate_hz};
  const double sr = egg.sample_rate_hz;
  for (std::size_t n = 0; n + 1 < egg.size(); ++n) {
    d.samples[n] = (egg.samples[n + 1] - egg.samples[n]) * sr;
  }
  return d;
}

PeakList peakdet(std::span<const double> x, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("peakdet delta must be > 0");
  return scan(x, [delta](std::size_t) { return delta; });
}

PeakList peakdet(const SignalBuffer& sig, double delta) {
  return peakdet(sig.view(), delta);
}

PeakList peakdet(std::span<const double> x, std::span<const double> delta) {
  if (delta.size() != x.size()) {
    throw std::invalid_argument("peakdet: one delta per sample required");
  }
  for (double d : delta) {
    if (!(d > 0.0)) throw std::invalid_argument("peakdet delta must be > 0");
  }
  return scan(x, [delta](std::size_t i) { return delta[i]; });
}

std::vector<PeriodEstimate> periods_to_f0(const PeakList& peaks, int sample_rate_hz) {
  std::vector<PeriodEstimate> out;
  const double sr = sample_rate_hz;
  for (std::size_t k = 1; k < peaks.maxima.size(); ++k) {
    const std::size_t i = peaks.maxima[k - 1].index;
    const std::size_t j = peaks.maxima[k].index;
    const double f0 = sr / static_cast<double>(j - i);
    if (f0 < kMinF0 || f0 > kMaxF0) continue;
    // dEGG sample n sits between EGG samples n and n + 1.
    const double center = (0.5 * static_cast<double>(i + j) + 0.5) / sr;
    out.push_back({center, f0});
  }
  return out;
}

F0Track frame_f0(std::span<const PeriodEstimate> estimates, double duration_s,
                 double hop_s) {
  if (!(hop_s > 0.0)) throw std::invalid_argument("hop_s must be > 0");
  F0Track track{hop_s, std::vector<double>(frame_count(duration_s, hop_s), kUnvoiced)};
  const double reach = 1.5 * hop_s;
  std::size_t lo = 0;
  std::vector<double> window;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const double t = track.time_s(k);
    while (lo < estimates.size() && estimates[lo].center_s < t - reach) ++lo;
    window.clear();
    for (std::size_t i = lo; i < estimates.size() && estimates[i].center_s <= t + reach; ++i) {
      window.push_back(estimates[i].f0_hz);
    }
    if (window.empty()) continue;
    std::sort(window.begin(), window.end());
    const std::size_t m = window.size() / 2;
    track.f0_hz[k] = window.size() % 2 == 1 ? window[m] : 0.5 * (window[m - 1] + window[m]);
  }
  return track;
}

std::vector<double> adaptive_delta(std::span<const double> d, int sample_rate_hz,
                                   const ExtractOptions& opts) {
  const std::size_t n = d.size();
  std::vector<double> delta(n, 0.0);
  if (n == 0) return delta;
  double global = 0.0;
  for (double v : d) global = std::max(global, std::abs(v));
  const auto half = static_cast<std::size_t>(std::lround(0.5 * opts.window_s * sample_rate_hz));
  // Sliding maximum of |d| over [i - half, i + half] with a monotonic deque.
  std::deque<std::size_t> q;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n - 1, i + half);
    for (; next <= hi; ++next) {
      while (!q.empty() && std::abs(d[q.back()]) <= std::abs(d[next])) q.pop_back();
      q.push_back(next);
    }
    while (q.front() + half < i) q.pop_front();
    delta[i] = std::max(opts.delta_fraction * std::abs(d[q.front()]),
                        opts.floor_fraction * global);
  }
  return delta;
}

F0Track extract_f0(const SignalBuffer& egg, const ExtractOptions& opts) {
  const double duration = egg.duration_s();
  if (egg.size() < 2 || peak_abs(egg.view()) == 0.0) {
    return frame_f0({}, duration, opts.hop_s);
  }
  const SignalBuffer d = degg(peak_normalize(egg));
  const std::vector<double> delta = adaptive_delta(d.view(), d.sample_rate_hz, opts);
  const PeakList peaks = peakdet(d.view(), delta);
  const std::vector<PeriodEstimate> periods = periods_to_f0(peaks, d.sample_rate_hz);
  return frame_f0(periods, duration, opts.hop_s);
}

}  // namespace eggcodec
