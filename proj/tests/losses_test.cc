// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eggcodec/errors.h"
#include "eggcodec/losses.h"
#include "eggcodec/spectral.h"
#include "test_util.h"

namespace eggcodec {
namespace {

SignalBuffer random_signal(std::size_t n, std::mt19937_64& rng, double scale = 0.3) {
  return SignalBuffer{testing::gaussian(n, rng, scale), 16000};
}

TEST(CosineTest, KnownValues) {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  EXPECT_NEAR(cosine_distance(a, a).value, 0.0, 1e-15);
  EXPECT_NEAR(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}).value, 1.0,
              1e-15);
  EXPECT_NEAR(cosine_distance(a, std::vector<double>{-1, -2, -3}).value, 2.0, 1e-15);
  EXPECT_THROW(cosine_distance(a, std::vector<double>{0, 0, 0}), DegenerateInputError);
  EXPECT_THROW(cosine_distance(a, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(CosineTest, RangeAndScaleInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> a = testing::gaussian(16, rng);
    const std::vector<double> b = testing::gaussian(16, rng);
    const double v = cosine_distance(a, b, false).value;
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 2.0);
    if (i < 500) {
      std::vector<double> sa = a;
      const double s = scale(rng);
      for (double& x : sa) x *= s;
      ASSERT_NEAR(cosine_distance(sa, b, false).value, v, 1e-12);
    }
  }
}

TEST(TimeLossTest, HandValueForDoubledConstant) {
  const std::vector<double> ref(1000, 0.5);
  std::vector<double> pred(1000, 1.0);
  const LossValue v = time_loss(pred, ref, LossConfig{});
  EXPECT_NEAR(v.value, 0.0075, 1e-15);
  EXPECT_NEAR(time_loss(ref, ref, LossConfig{}).value, 0.0, 1e-15);
}

TEST(TimeLossTest, GradientMatchesDifferences) {
  std::mt19937_64 rng(3);
  const std::vector<double> p = testing::gaussian(64, rng), r = testing::gaussian(64, rng);
  const LossValue v = time_loss(p, r, LossConfig{});
  ASSERT_EQ(v.grad.size(), p.size());
  for (std::size_t i = 0; i < p.size(); i += 7) {
    std::vector<double> hi = p, lo = p;
    hi[i] += 1e-6;
    lo[i] -= 1e-6;
    const double n =
        (time_loss(hi, r, LossConfig{}, false).value - time_loss(lo, r, LossConfig{}, false).value) /
        2e-6;
    EXPECT_NEAR(v.grad[i], n, 1e-6 * std::max(1.0, std::abs(n)));
  }
  EXPECT_TRUE(time_loss(p, r, LossConfig{}, false).grad.empty());
}

// Mean over scales of mean|dS| + sqrt(mean dS^2), from log_mel directly.
double spectral_oracle(const SignalBuffer& a, const SignalBuffer& b, const LossConfig& cfg) {
  double total = 0.0;
  for (int len : cfg.spectral_scales) {
    const Matrix d = log_mel(a, len).values - log_mel(b, len).values;
    total += d.cwiseAbs().mean() + std::sqrt(d.array().square().mean());
  }
  return total / static_cast<double>(cfg.spectral_scales.size());
}

TEST(SpectralLossTest, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(4);
  const SignalBuffer a = random_signal(2048, rng), b = random_signal(2048, rng);
  const LossConfig cfg;
  const double v = spectral_loss(a, b, cfg).value;
  EXPECT_NEAR(v, spectral_oracle(a, b, cfg), 1e-12);
  EXPECT_EQ(v, spectral_loss(b, a, cfg, false).value);
  const LossValue self = spectral_loss(a, a, cfg);
  EXPECT_EQ(self.value, 0.0);
  for (double g : self.grad) EXPECT_EQ(g, 0.0);
}

TEST(SpectralLossTest, RejectsShortOrMismatchedInput) {
  std::mt19937_64 rng(5);
  const SignalBuffer a = random_signal(512, rng), b = random_signal(513, rng);
  EXPECT_THROW(spectral_loss(a, a, LossConfig{}), std::invalid_argument);
  LossConfig small;
  small.spectral_scales = {32, 64};
  EXPECT_THROW(spectral_loss(a, b, small), std::invalid_argument);
  EXPECT_NO_THROW(spectral_loss(a, a, small));
}

TEST(ReconstructionTest, IdentityIsZero) {
  std::mt19937_64 rng(6);
  const SignalBuffer y = random_signal(2048, rng);
  const ReconstructionLoss r = reconstruction_loss(y, y, LossConfig{});
  EXPECT_LE(std::abs(r.report.l_s), 1e-9);
  EXPECT_LE(std::abs(r.report.l_t), 1e-9);
  EXPECT_LE(std::abs(r.report.l_reco), 1e-9);
  EXPECT_EQ(r.report.l_g, 0.0);
  EXPECT_EQ(r.report.l_d, 0.0);
  EXPECT_EQ(r.report.l_l, 0.0);
}

TEST(ReconstructionTest, Composition) {
  std::mt19937_64 rng(7);
  const LossConfig cfg;
  for (int i = 0; i < 20; ++i) {
    const SignalBuffer p = random_signal(1024, rng), r = random_signal(1024, rng);
    const LossReport rep = reconstruction_loss(p, r, cfg, false).report;
    EXPECT_NEAR(rep.l_t, (rep.l_l1 + rep.l_l2) / 100.0 + rep.l_cos, 1e-15);
    EXPECT_NEAR(rep.l_reco, rep.l_s + 100.0 * rep.l_t, 1e-12);
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double d = p.samples[k] - r.samples[k];
      l1 += std::abs(d);
      l2 += d * d;
    }
    EXPECT_NEAR(rep.l_l1, l1 / 1024.0, 1e-14);
    EXPECT_NEAR(rep.l_l2, l2 / 1024.0, 1e-14);
    EXPECT_GE(rep.l_cos, 0.0);
    EXPECT_LE(rep.l_cos, 2.0);
  }
}

TEST(ReconstructionTest, Toggles) {
  std::mt19937_64 rng(8);
  const SignalBuffer p = random_signal(1024, rng), r = random_signal(1024, rng);
  LossConfig no_freq;
  no_freq.include_spectral = false;
  const LossReport nf = reconstruction_loss(p, r, no_freq, false).report;
  EXPECT_EQ(nf.l_s, 0.0);
  EXPECT_EQ(nf.l_reco, 100.0 * nf.l_t);

  LossConfig cos_only;
  cos_only.include_time_l1l2 = false;
  const LossReport co = reconstruction_loss(p, r, cos_only, false).report;
  EXPECT_EQ(co.l_l1, 0.0);
  EXPECT_EQ(co.l_t, co.l_cos);

  LossConfig l1l2_only;
  l1l2_only.include_time_cos = false;
  const LossReport ll = reconstruction_loss(p, r, l1l2_only, false).report;
  EXPECT_EQ(ll.l_cos, 0.0);
  EXPECT_NEAR(ll.l_t, (ll.l_l1 + ll.l_l2) / 100.0, 1e-15);

  LossConfig no_time;
  no_time.include_time_cos = no_time.include_time_l1l2 = false;
  const LossReport nt = reconstruction_loss(p, r, no_time, false).report;
  EXPECT_EQ(nt.l_t, 0.0);
  EXPECT_EQ(nt.l_reco, nt.l_s);

  LossConfig none = no_time;
  none.include_spectral = false;
  EXPECT_THROW(reconstruction_loss(p, r, none), std::invalid_argument);
}

TEST(ReconstructionTest, GradientIsSumOfParts) {
  std::mt19937_64 rng(9);
  const SignalBuffer p = random_signal(1024, rng), r = random_signal(1024, rng);
  LossConfig cfg;
  cfg.spectral_scales = {32, 64, 128};
  const ReconstructionLoss full = reconstruction_loss(p, r, cfg);
  const LossValue s = spectral_loss(p, r, cfg);
  const LossValue t = time_loss(p.samples, r.samples, cfg);
  ASSERT_EQ(full.grad.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(full.grad[i], s.grad[i] + 100.0 * t.grad[i], 1e-12);
  }
}

TEST(LossConfigTest, Validate) {
  LossConfig c;
  EXPECT_NO_THROW(validate(c));
  c.lambda = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = LossConfig{};
  c.spectral_scales = {48};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.spectral_scales = {};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.spectral_scales = {2048};
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(LossReportTest, JsonRoundTrip) {
  LossReport r;
  r.l_s = 1.5;
  r.l_t = 0.25;
  r.l_reco = 26.5;
  const nlohmann::json j = r;
  const LossReport back = j.get<LossReport>();
  EXPECT_EQ(back.l_s, 1.5);
  EXPECT_EQ(back.l_t, 0.25);
  EXPECT_EQ(back.l_reco, 26.5);
}

}  // namespace
}  // namespace eggcodec
