// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eggcodec {
namespace {

// Fraction of the glottal cycle spent in the closing (rising) edge.
constexpr double kClosingFraction = 0.15;

double glottal_shape(double phase) {
  constexpr double c = kClosingFraction;
  const double psi = phase + c / 2 - std::floor(phase + c / 2);
  if (psi < c) return std::sin(std::numbers::pi * (psi - c / 2) / c);
  return std::cos(std::numbers::pi * (psi - c) / (1.0 - c));
}

struct Resonator {
  double gain, c1, c2;
  Resonator(double freq_hz, double bandwidth_hz, int sr) {
    const double r = std::exp(-std::numbers::pi * bandwidth_hz / sr);
    const double theta = 2.0 * std::numbers::pi * freq_hz / sr;
    c1 = 2.0 * r * std::cos(theta);
    c2 = -r * r;
    gain = 1.0 - c1 - c2;
  }
  void apply(std::vector<double>& x) const {
    double y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
      const double y = gain * v + c1 * y1 + c2 * y2;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

double SynthSpec::f0_at(double t) const {
  if (f0_contour.empty()) return 0.0;
  if (t <= f0_contour.front().time_s) return f0_contour.front().f0_hz;
  if (t >= f0_contour.back().time_s) return f0_contour.back().f0_hz;
  const auto hi = std::upper_bound(
      f0_contour.begin(), f0_contour.end(), t,
      [](double v, const ContourPoint& p) { return v < p.time_s; });
  const auto lo = hi - 1;
  const double w = (t - lo->time_s) / (hi->time_s - lo->time_s);
  return lo->f0_hz + w * (hi->f0_hz - lo->f0_hz);
}

void validate(const SynthSpec& spec) {
  if (!(spec.duration_s > 0.0) || spec.sample_rate_hz <= 0) {
    throw std::invalid_argument("synth: duration and rate must be positive");
  }
  if (spec.noise_floor < 0.0) {
    throw std::invalid_argument("synth: noise_floor must be >= 0");
  }
  for (std::size_t i = 1; i < spec.f0_contour.size(); ++i) {
    if (!(spec.f0_contour[i].time_s > spec.f0_contour[i - 1].time_s)) {
      throw std::invalid_argument("synth: contour times must increase");
    }
  }
  if (!spec.voicing_mask.empty() && spec.f0_contour.empty()) {
    throw std::invalid_argument("synth: voiced intervals need an F0 contour");
  }
  double prev_end = 0.0;
  for (const auto& iv : spec.voicing_mask) {
    if (iv.start_s < prev_end || !(iv.end_s > iv.start_s) ||
        iv.end_s > spec.duration_s + 1e-12) {
      throw std::invalid_argument(
          "synth: voiced intervals must be ordered, non-overlapping and "
          "inside [0, duration]");
    }
    prev_end = iv.end_s;
  }
  for (const auto& p : spec.f0_contour) {
    bool in_voicing = false;
    for (const auto& iv : spec.voicing_mask) {
      in_voicing |= p.time_s >= iv.start_s && p.time_s <= iv.end_s;
    }
    if (in_voicing && (p.f0_hz < kMinF0 || p.f0_hz > kMaxF0)) {
      throw std::invalid_argument("synth: F0 outside [50, 600] Hz");
    }
  }
  // Linear interpolation keeps interior values inside the endpoint range, so
  // checking the contour at interval ends covers the held segments.
  for (const auto& iv : spec.voicing_mask) {
    for (double t : {iv.start_s, iv.end_s}) {
      const double f = spec.f0_at(t);
      if (f < kMinF0 || f > kMaxF0) {
        throw std::invalid_argument("synth: F0 outside [50, 600] Hz");
      }
    }
  }
}

SynthUtterance synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  const int sr = spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * sr));

  SynthUtterance out;
  out.egg.sample_rate_hz = sr;
  out.egg.samples.assign(n, 0.0);

  for (std::size_t v = 0; v < spec.voicing_mask.size(); ++v) {
    const auto& iv = spec.voicing_mask[v];
    const auto first = static_cast<std::size_t>(std::ceil(iv.start_s * sr - 1e-9));
    const std::size_t limit =
        v + 1 < spec.voicing_mask.size()
            ? static_cast<std::size_t>(
                  std::ceil(spec.voicing_mask[v + 1].start_s * sr - 1e-9))
            : n;
    // Phase at the interval end decides where the last cycle is completed.
    double phase = 0.0;
    double phase_at_end = -1.0;
    double end_phase = -1.0;
    for (std::size_t i = first; i < std::min(limit, n); ++i) {
      const double t = static_cast<double>(i) / sr;
      if (t >= iv.end_s && phase_at_end < 0.0) {
        phase_at_end = phase;
        end_phase = std::ceil(phase - 0.5) + 0.5;
      }
      if (end_phase >= 0.0 && phase > end_phase) break;
      out.egg.samples[i] = glottal_shape(phase);
      const double next = phase + (spec.f0_at(t) + spec.f0_at(t + 1.0 / sr)) /
                                      (2.0 * sr);
      // A closure sits where the phase crosses an integer; index the nearer
      // sample.
      const double k = std::floor(next);
      if (i == first) {
        out.closures.push_back(i);
      } else if (k > std::floor(phase) && (end_phase < 0.0 || k < end_phase)) {
        const double frac = (k - phase) / (next - phase);
        out.closures.push_back(frac < 0.5 ? i : i + 1);
      }
      phase = next;
    }
  }
  // A closure rounded onto the first sample past the buffer is dropped.
  while (!out.closures.empty() && out.closures.back() >= n) {
    out.closures.pop_back();
  }

  out.audio.sample_rate_hz = sr;
  out.audio.samples = out.egg.samples;
  Resonator(500.0, 100.0, sr).apply(out.audio.samples);
  Resonator(1500.0, 150.0, sr).apply(out.audio.samples);
  out.audio = peak_normalize(out.audio, 0.9);
  if (spec.noise_floor > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spec.noise_floor);
    for (double& s : out.audio.samples) s += gauss(rng);
  }

  out.truth.hop_s = kDefaultHop;
  const std::size_t frames = frame_count(static_cast<double>(n) / sr, kDefaultHop);
  out.truth.f0_hz.assign(frames, kUnvoiced);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = out.truth.time_s(k);
    for (const auto& iv : spec.voicing_mask) {
      if (t >= iv.start_s && t < iv.end_s) out.truth.f0_hz[k] = spec.f0_at(t);
    }
  }
  return out;
}

SynthSpec random_synth_spec(const SynthRanges& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SynthSpec spec;
  spec.sample_rate_hz = r.sample_rate_hz;
  // Whole frames keep truth and extracted tracks on the same grid.
  spec.duration_s =
      std::round(uniform(r.min_duration_s, r.max_duration_s) * 100.0) / 100.0;
  spec.noise_floor = r.noise_floor;

  const double f_start = uniform(r.min_f0_hz, r.max_f0_hz);
  if (unit(rng) < r.glide_probability) {
    spec.f0_contour = {{0.0, f_start},
                       {spec.duration_s, uniform(r.min_f0_hz, r.max_f0_hz)}};
  } else {
    spec.f0_contour = {{0.0, f_start}};
  }

  if (unit(rng) < r.gap_probability) {
    const double gap = std::round(r.gap_fraction * spec.duration_s * 100.0) / 100.0;
    const double start =
        std::round(uniform(0.2, 0.8 - r.gap_fraction) * spec.duration_s * 100.0) /
        100.0;
    spec.voicing_mask = {{0.0, start}, {start + gap, spec.duration_s}};
  } else {
    spec.voicing_mask = {{0.0, spec.duration_s}};
  }
  return spec;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

}  // namespace eggcodec
