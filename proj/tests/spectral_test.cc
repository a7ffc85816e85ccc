// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "eggcodec/spectral.h"
#include "test_util.h"

namespace eggcodec {
namespace {

double hann(int n, int len) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / len);
}

// Direct O(N^2) DFT of reflect-padded, Hann-windowed frames.
Matrix naive_stft(const std::vector<double>& x, int len, int hop) {
  const int n = static_cast<int>(x.size());
  const int pad = len / 2;
  auto at = [&](int i) {
    int j = i - pad;
    if (j < 0) j = -j;
    if (j >= n) j = 2 * (n - 1) - j;
    return x[static_cast<std::size_t>(j)];
  };
  const int frames = n / hop + 1;
  const int bins = len / 2 + 1;
  Matrix m(frames, bins);
  for (int f = 0; f < frames; ++f) {
    for (int k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (int t = 0; t < len; ++t) {
        acc += at(f * hop + t) * hann(t, len) *
               std::polar(1.0, -2.0 * std::numbers::pi * k * t / len);
      }
      m(f, k) = std::abs(acc);
    }
  }
  return m;
}

TEST(StftTest, MatchesNaiveDft) {
  std::mt19937_64 rng(1);
  for (int len : {32, 64, 256}) {
    const std::vector<double> x = testing::gaussian(700, rng);
    const Matrix fast = stft_mag(SignalBuffer{x, 16000}, len, len / 4);
    const Matrix slow = naive_stft(x, len, len / 4);
    ASSERT_EQ(fast.rows(), slow.rows());
    ASSERT_EQ(fast.cols(), slow.cols());
    EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-10) << len;
  }
}

TEST(StftTest, FrameCount) {
  EXPECT_EQ(stft_frame_count(16000, 64), 251);
  EXPECT_EQ(stft_frame_count(1000, 16), 63);
  const Matrix m = stft_mag(SignalBuffer{std::vector<double>(1000, 0.0), 16000}, 64, 16);
  EXPECT_EQ(m.rows(), 63);
  EXPECT_EQ(m.cols(), 33);
  EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(StftTest, CentredImpulseIsFlat) {
  // Frame 4 with hop 16 starts at padded index 64, i.e. sample 32; its centre
  // (window index 32) is sample 64.
  std::vector<double> x(256, 0.0);
  x[64] = 1.0;
  const Matrix m = stft_mag(SignalBuffer{x, 16000}, 64, 16);
  for (int k = 0; k < m.cols(); ++k) EXPECT_NEAR(m(4, k), hann(32, 64), 1e-12);
}

TEST(StftTest, BinCentredSineConcentratesEnergy) {
  const int len = 256, k = 20;
  const SignalBuffer s = testing::sine(k * 16000.0 / len, 0.2);
  const Matrix m = stft_mag(s, len, len / 4);
  const int f = static_cast<int>(m.rows()) / 2;
  double total = 0.0, near = 0.0;
  for (int b = 0; b < m.cols(); ++b) {
    const double e = m(f, b) * m(f, b);
    total += e;
    if (std::abs(b - k) <= 1) near += e;
  }
  EXPECT_GE(near / total, 0.95);
}

TEST(StftTest, RejectsBadArguments) {
  const SignalBuffer s{std::vector<double>(100, 0.0), 16000};
  EXPECT_THROW(stft_mag(s, 48, 12), std::invalid_argument);
  EXPECT_THROW(stft_mag(s, 2048, 512), std::invalid_argument);
  EXPECT_THROW(stft_mag(s, 64, 0), std::invalid_argument);
  EXPECT_THROW(stft_mag(SignalBuffer{std::vector<double>(16, 0.0), 16000}, 64, 16),
               std::invalid_argument);
}

TEST(MelTest, FilterbankShape) {
  const auto fb = mel_filterbank(513, 64, 16000);
  ASSERT_EQ(fb->rows(), 64);
  ASSERT_EQ(fb->cols(), 513);
  for (int r = 0; r < fb->rows(); ++r) EXPECT_GT(fb->row(r).sum(), 0.0) << r;
  for (int c = 0; c < fb->cols(); ++c) {
    int nonzero = 0;
    for (int r = 0; r < fb->rows(); ++r) nonzero += (*fb)(r, c) > 0.0 ? 1 : 0;
    EXPECT_LE(nonzero, 2);
    EXPECT_LE(fb->col(c).sum(), 2.0 + 1e-12);
  }
  EXPECT_LE(fb->maxCoeff(), 1.0 + 1e-12);
  EXPECT_GE(fb->minCoeff(), 0.0);
  // Cached per key.
  EXPECT_EQ(fb.get(), mel_filterbank(513, 64, 16000).get());
}

TEST(MelTest, SingleFilterPeaksAtMidMel) {
  const auto fb = mel_filterbank(513, 1, 16000);
  Eigen::Index peak = 0;
  fb->row(0).maxCoeff(&peak);
  const double mel_top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  const double mid_hz = 700.0 * (std::pow(10.0, mel_top / 2.0 / 2595.0) - 1.0);
  EXPECT_NEAR(static_cast<double>(peak) * 8000.0 / 512.0, mid_hz, 8000.0 / 512.0);
  EXPECT_GT(fb->row(0).sum(), 0.0);
}

TEST(LogMelTest, ZeroSignalIsFloor) {
  const MelSpectrogram m = log_mel(SignalBuffer{std::vector<double>(2048, 0.0), 16000}, 256);
  EXPECT_EQ(m.hop, 64);
  EXPECT_EQ(m.n_mels, 64);
  EXPECT_EQ(m.values.rows(), 2048 / 64 + 1);
  EXPECT_NEAR(m.values.maxCoeff(), std::log(1e-5), 1e-12);
  EXPECT_NEAR(m.values.minCoeff(), std::log(1e-5), 1e-12);
}

TEST(LogMelTest, FiniteAndAboveFloor) {
  std::mt19937_64 rng(4);
  const MelSpectrogram m = log_mel(SignalBuffer{testing::gaussian(4000, rng), 16000}, 256);
  EXPECT_TRUE(m.values.allFinite());
  EXPECT_GE(m.values.minCoeff(), std::log(1e-5));
}

TEST(LogMelTest, DoublingAmplitudeAddsLn2) {
  const SignalBuffer a = testing::sine(1000.0, 0.25, 16000, 0.4);
  const SignalBuffer b = testing::sine(1000.0, 0.25, 16000, 0.8);
  const MelSpectrogram ma = log_mel(a, 256), mb = log_mel(b, 256);
  const int f = static_cast<int>(ma.values.rows()) / 2;
  Eigen::Index band = 0;
  ma.values.row(f).maxCoeff(&band);
  EXPECT_NEAR(mb.values(f, band) - ma.values(f, band), std::log(2.0), 1e-4);
}

double weighted_log_mel(const std::vector<double>& x, int len, const Matrix& w) {
  return (log_mel(SignalBuffer{x, 16000}, len).values.array() * w.array()).sum();
}

TEST(LogMelBackwardTest, ZeroUpstreamGivesZero) {
  std::mt19937_64 rng(5);
  const SignalBuffer s{testing::gaussian(512, rng), 16000};
  const Matrix up = Matrix::Zero(log_mel(s, 64).values.rows(), 64);
  for (double g : log_mel_backward(s, 64, up)) EXPECT_EQ(g, 0.0);
}

TEST(LogMelBackwardTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(6);
  const std::vector<double> x = testing::gaussian(512, rng);
  const int len = 64;
  const Matrix up = Matrix::NullaryExpr(log_mel(SignalBuffer{x, 16000}, len).values.rows(), 64,
                                        [&rng]() { return std::normal_distribution<>()(rng); });
  const std::vector<double> g = log_mel_backward(SignalBuffer{x, 16000}, len, up);
  ASSERT_EQ(g.size(), x.size());
  const double h = 1e-4;
  std::vector<std::size_t> probe = {0, 1, 2, 31, 32, 100, 255, 256, 400, 509, 510, 511};
  std::vector<double> numeric;
  double scale = 0.0;
  for (std::size_t i : probe) {
    std::vector<double> p = x, m = x;
    p[i] += h;
    m[i] -= h;
    numeric.push_back((weighted_log_mel(p, len, up) - weighted_log_mel(m, len, up)) / (2 * h));
    scale = std::max(scale, std::abs(numeric.back()));
  }
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double a = g[probe[k]], n = numeric[k];
    const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3 * scale});
    EXPECT_LE(rel, 1e-4) << "sample " << probe[k];
  }
}

}  // namespace
}  // namespace eggcodec
