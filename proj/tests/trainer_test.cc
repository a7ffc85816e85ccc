// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "eggcodec/errors.h"
#include "eggcodec/nn/checkpoint.h"
#include "eggcodec/synth.h"
#include "eggcodec/trainer.h"
#include "test_util.h"

namespace eggcodec {
namespace {

TEST(TrainConfigTest, Validate) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  auto bad = [](auto mutate) {
    TrainConfig t;
    mutate(t);
    return t;
  };
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.beta1 = 1.0; })), std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.beta2 = 0.0; })), std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.lr = 0.0; })), std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.crop_len = 1000; })), std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.batch_size = 0; })), std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.snr_levels_db.clear(); })),
               std::invalid_argument);
  EXPECT_THROW(validate(bad([](TrainConfig& t) { t.snr_levels_db = {std::nan("")}; })),
               std::invalid_argument);
}

TEST(AdamTest, ZeroGradientLeavesParamsUnchanged) {
  std::vector<double> p = {0.5, -1.5, 2.0};
  const std::vector<double> g = {0.0, 0.0, 0.0};
  std::vector<std::span<double>> ps = {p};
  std::vector<std::span<const double>> gs = {g};
  AdamState st;
  adam_step(ps, gs, st, TrainConfig{});
  EXPECT_EQ(p, (std::vector<double>{0.5, -1.5, 2.0}));
  EXPECT_EQ(st.t, 1);
}

TEST(AdamTest, HandEvaluatedSteps) {
  const TrainConfig cfg;
  std::vector<double> p = {0.0};
  AdamState st;
  std::vector<std::span<double>> ps = {p};

  const std::vector<double> g1 = {1.0};
  std::vector<std::span<const double>> gs1 = {g1};
  adam_step(ps, gs1, st, cfg);
  // t = 1: m_hat = g, v_hat = g^2.
  EXPECT_NEAR(p[0], -1e-3 / (1.0 + 1e-8), 1e-15);

  const std::vector<double> g2 = {-0.5};
  std::vector<std::span<const double>> gs2 = {g2};
  const double before = p[0];
  adam_step(ps, gs2, st, cfg);
  const double m = 0.9 * 0.1 * 1.0 + 0.1 * -0.5;
  const double v = 0.999 * 0.001 * 1.0 + 0.001 * 0.25;
  const double m_hat = m / (1.0 - 0.81);
  const double v_hat = v / (1.0 - 0.999 * 0.999);
  EXPECT_NEAR(p[0] - before, -1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
  EXPECT_EQ(st.t, 2);
  EXPECT_GE(st.v[0][0], 0.0);
}

TEST(AdamTest, StepBoundedByLearningRate) {
  const TrainConfig cfg;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mag(0.01, 10.0);
  std::vector<double> p(50, 0.0);
  AdamState st;
  // With 1 - beta1 > sqrt(1 - beta2) the step is bounded by
  // lr (1 - beta1) / sqrt(1 - beta2), not lr itself.
  const double bound = cfg.lr * (1.0 - cfg.beta1) / std::sqrt(1.0 - cfg.beta2);
  for (int step = 0; step < 20; ++step) {
    std::vector<double> g(50);
    for (double& x : g) x = mag(rng);
    const std::vector<double> prev = p;
    std::vector<std::span<double>> ps = {p};
    std::vector<std::span<const double>> gs = {g};
    adam_step(ps, gs, st, cfg);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_LE(std::abs(p[i] - prev[i]), bound * (1.0 + 1e-9));
      EXPECT_LT(p[i], prev[i]);
    }
  }
}

TEST(AdamTest, ShapeMismatchThrows) {
  std::vector<double> p = {1.0, 2.0};
  const std::vector<double> g = {1.0};
  std::vector<std::span<double>> ps = {p};
  std::vector<std::span<const double>> gs = {g};
  AdamState st;
  EXPECT_THROW(adam_step(ps, gs, st, TrainConfig{}), std::invalid_argument);
}

TrainingPair synth_pair(const std::string& id, double f0, double seconds, std::uint64_t seed) {
  SynthSpec spec;
  spec.f0_contour = {{0.0, f0}};
  spec.duration_s = seconds;
  spec.voicing_mask = {{0.0, seconds}};
  const SynthUtterance u = synth_corpus(spec, seed);
  return {id, u.audio, u.egg, false, false};
}

Corpus small_corpus(std::size_t n, double seconds = 0.5) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back(synth_pair("u" + std::to_string(i), 100.0 + 30.0 * i, seconds, i));
  }
  return c;
}

TEST(PrepareCorpusTest, FiltersAndNormalises) {
  TrainConfig cfg;
  const Corpus in = small_corpus(2);
  const Corpus out = prepare_corpus(in, cfg);
  for (const TrainingPair& p : out) {
    EXPECT_TRUE(p.egg_highpassed);
    EXPECT_TRUE(p.normalized);
    EXPECT_NEAR(peak_abs(p.egg.view()), kNormalizedPeak, 1e-12);
    EXPECT_NEAR(peak_abs(p.audio.view()), kNormalizedPeak, 1e-12);
  }
  EXPECT_NE(out[0].egg.samples, peak_normalize(in[0].egg).samples);
  // Preparing twice changes nothing.
  const Corpus again = prepare_corpus(out, cfg);
  EXPECT_EQ(again[0].egg.samples, out[0].egg.samples);

  cfg.filter_refs = false;
  const Corpus raw = prepare_corpus(in, cfg);
  EXPECT_FALSE(raw[0].egg_highpassed);
  EXPECT_EQ(raw[0].egg.samples, peak_normalize(in[0].egg).samples);
  EXPECT_THROW(prepare_corpus(out, cfg), DataError);
}

TEST(PrepareCorpusTest, RejectsBadPairs) {
  Corpus c = small_corpus(1);
  c[0].egg.samples.pop_back();
  EXPECT_THROW(prepare_corpus(c, TrainConfig{}), DataError);
  c = small_corpus(1);
  c[0].audio.sample_rate_hz = 8000;
  EXPECT_THROW(prepare_corpus(c, TrainConfig{}), DataError);
}

TEST(MakeBatchTest, CleanCropsEqualRawCrops) {
  TrainConfig cfg;
  cfg.crop_len = 1024;
  cfg.snr_levels_db = {kCleanSnr};
  const Corpus c = prepare_corpus(small_corpus(3), cfg);
  const std::vector<std::size_t> items = {2, 0, 1};
  const Batch b = make_batch(c, items, cfg, 5);
  ASSERT_EQ(b.items, items);
  EXPECT_EQ(b.audio.shape(), (std::vector<int>{3, 1, 1024}));
  for (int k = 0; k < 3; ++k) {
    const TrainingPair& p = c[b.items[static_cast<std::size_t>(k)]];
    for (int t = 0; t < 1024; ++t) {
      ASSERT_EQ(b.audio.at(k, 0, t), p.audio.samples[b.offsets[static_cast<std::size_t>(k)] + t]);
      ASSERT_EQ(b.egg.at(k, 0, t), p.egg.samples[b.offsets[static_cast<std::size_t>(k)] + t]);
    }
  }
}

TEST(MakeBatchTest, DeterministicPerStep) {
  TrainConfig cfg;
  cfg.crop_len = 1024;
  const Corpus c = prepare_corpus(small_corpus(3), cfg);
  const std::vector<std::size_t> items = {0, 1, 2};
  const Batch a = make_batch(c, items, cfg, 1);
  const Batch b = make_batch(c, items, cfg, 1);
  const Batch d = make_batch(c, items, cfg, 2);
  EXPECT_EQ(a.audio, b.audio);
  EXPECT_EQ(a.offsets, b.offsets);
  EXPECT_NE(a.offsets, d.offsets);
  cfg.seed = 99;
  EXPECT_NE(make_batch(c, items, cfg, 1).offsets, a.offsets);
}

TEST(MakeBatchTest, SnrLevelsDrawnUniformly) {
  TrainConfig cfg;
  cfg.crop_len = 256;
  const Corpus c = prepare_corpus(small_corpus(10, 0.2), cfg);
  std::vector<std::size_t> items(10);
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
  std::map<double, int> counts;
  for (std::uint64_t step = 1; step <= 100; ++step) {
    for (double s : make_batch(c, items, cfg, step).snr_db) ++counts[s];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [level, n] : counts) {
    EXPECT_GE(n, 200) << level;
    EXPECT_LE(n, 300) << level;
  }
}

TEST(MakeBatchTest, SilenceGuard) {
  TrainConfig cfg;
  cfg.crop_len = 512;
  cfg.filter_refs = false;
  Corpus c = small_corpus(2);
  c[1].egg.samples.assign(c[1].egg.size(), 0.0);
  c[1].normalized = true;
  c[0] = prepare_corpus({c[0]}, cfg)[0];
  const std::vector<std::size_t> items = {0, 1};
  const Batch b = make_batch(c, items, cfg, 1);
  EXPECT_EQ(b.items, (std::vector<std::size_t>{0}));
  EXPECT_EQ(b.skipped, 1u);
  EXPECT_EQ(b.audio.batch(), 1);

  Corpus shortc = small_corpus(1, 0.05);
  cfg.crop_len = 1024;
  const std::vector<std::size_t> one = {0};
  EXPECT_THROW(make_batch(shortc, one, cfg, 1), DataError);
  EXPECT_THROW(make_batch(Corpus{}, one, cfg, 1), DataError);
}

nn::ModelConfig tiny_model() {
  nn::ModelConfig m;
  m.base_channels = 4;
  m.latent_dim = 8;
  m.codebook_size = 8;
  m.timing_dilations = {1};
  return m;
}

TrainConfig tiny_train() {
  TrainConfig cfg;
  cfg.crop_len = 1024;
  cfg.batch_size = 2;
  cfg.epochs = 2;
  cfg.seed = 3;
  cfg.loss_cfg.spectral_scales = {32, 64, 128};
  return cfg;
}

TEST(FitTest, ZeroEpochsLeavesModelUnchanged) {
  nn::Model m(tiny_model(), 1);
  const nn::Tensor before = m.parameters()[0].var->value;
  TrainConfig cfg = tiny_train();
  cfg.epochs = 0;
  const FitResult r = fit(m, Corpus{}, cfg);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(m.parameters()[0].var->value, before);
}

TEST(FitTest, DeterministicCurveAndCheckpoint) {
  testing::TempDir dir;
  const TrainConfig cfg = tiny_train();
  const Corpus c = prepare_corpus(small_corpus(3), cfg);
  nn::Model a(tiny_model(), 2), b(tiny_model(), 2);
  int calls = 0;
  FitOptions opts;
  opts.checkpoint_path = dir / "ck.eggc";
  opts.on_step = [&calls](const StepLoss&) { ++calls; };
  const FitResult ra = fit(a, c, cfg, opts);
  const FitResult rb = fit(b, c, cfg);
  ASSERT_EQ(ra.curve.size(), 4u);  // 2 epochs x ceil(3 / 2)
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(ra.curve, rb.curve);
  for (std::size_t i = 0; i < ra.curve.size(); ++i) {
    EXPECT_EQ(ra.curve[i].step, static_cast<std::int64_t>(i + 1));
    EXPECT_TRUE(std::isfinite(ra.curve[i].l_reco));
  }
  const nn::Model loaded = nn::load_checkpoint(dir / "ck.eggc");
  EXPECT_EQ(loaded.parameters()[3].var->value, a.parameters()[3].var->value);
}

TEST(FitTest, NonFiniteLossAborts) {
  const TrainConfig cfg = tiny_train();
  const Corpus c = prepare_corpus(small_corpus(2), cfg);
  nn::Model m(tiny_model(), 4);
  m.parameters().back().var->value.fill(std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(fit(m, c, cfg), NumericAbort);
}

TEST(FitTest, NoFreqToggleZeroesSpectralColumn) {
  TrainConfig cfg = tiny_train();
  cfg.epochs = 1;
  cfg.loss_cfg.include_spectral = false;
  const Corpus c = prepare_corpus(small_corpus(2), cfg);
  nn::Model m(tiny_model(), 5);
  const FitResult r = fit(m, c, cfg);
  for (const StepLoss& s : r.curve) {
    EXPECT_EQ(s.l_s, 0.0);
    EXPECT_NEAR(s.l_reco, 100.0 * s.l_t, 1e-12 * s.l_reco);
  }
}

TEST(LossCsvTest, Format) {
  std::ostringstream out;
  write_loss_csv_header(out);
  write_loss_csv_row({3, 0.5, 0.25, 0.125, 25.5, 0.001}, out);
  EXPECT_EQ(out.str(), "step,l_s,l_t,l_cos,l_reco,commit\n3,0.5,0.25,0.125,25.5,0.001\n");
}

}  // namespace
}  // namespace eggcodec
