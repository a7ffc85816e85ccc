// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "eggcodec/config.h"
#include "eggcodec/errors.h"
#include "test_util.h"

namespace eggcodec {
namespace {

const std::filesystem::path kGolden = EGGCODEC_GOLDEN_DIR;

TEST(AblationTagTest, NamesRoundTrip) {
  for (AblationTag t : kAllAblationTags) {
    EXPECT_EQ(parse_ablation_tag(to_string(t)), t);
  }
  EXPECT_FALSE(parse_ablation_tag("best").has_value());
}

TEST(AblationTagTest, Toggles) {
  const double inf = std::numeric_limits<double>::infinity();
  const AblationToggles opt = ablation_toggles(AblationTag::kOptimal);
  EXPECT_TRUE(opt.include_spectral && opt.include_time_cos && opt.include_time_l1l2);
  EXPECT_EQ(opt.snr_levels_db, (std::vector<double>{3, 5, 7, inf}));
  EXPECT_TRUE(opt.filter_refs);
  EXPECT_FALSE(ablation_toggles(AblationTag::kCos).include_time_l1l2);
  EXPECT_TRUE(ablation_toggles(AblationTag::kCos).include_time_cos);
  EXPECT_FALSE(ablation_toggles(AblationTag::kL1L2).include_time_cos);
  const AblationToggles nt = ablation_toggles(AblationTag::kNoTime);
  EXPECT_FALSE(nt.include_time_cos || nt.include_time_l1l2);
  EXPECT_FALSE(ablation_toggles(AblationTag::kNoFreq).include_spectral);
  EXPECT_EQ(ablation_toggles(AblationTag::kNda5).snr_levels_db, std::vector<double>{5});
  EXPECT_EQ(ablation_toggles(AblationTag::kNda7).snr_levels_db, std::vector<double>{7});
  EXPECT_EQ(ablation_toggles(AblationTag::kNoNda).snr_levels_db, std::vector<double>{inf});
  EXPECT_FALSE(ablation_toggles(AblationTag::kUnfiltered).filter_refs);
  EXPECT_EQ(expand_tag(AblationTag::kNoGanPlaceholder).train,
            expand_tag(AblationTag::kOptimal).train);
}

TEST(GoldenConfigTest, EveryTagMatchesItsGoldenFile) {
  for (AblationTag t : kAllAblationTags) {
    const std::string name(to_string(t));
    const std::filesystem::path file = kGolden / (name + ".yaml");
    ASSERT_TRUE(std::filesystem::exists(file)) << file;
    EXPECT_EQ(to_yaml(expand_tag(t)), testing::read_file(file)) << name;
    EXPECT_EQ(load_experiment_config(file), expand_tag(t)) << name;
  }
}

TEST(ConfigParseTest, MinimalFileUsesDefaults) {
  const ExperimentConfig c = parse_experiment_config("ablation_tag: nda7\n");
  ExperimentConfig expected = expand_tag(AblationTag::kNda7);
  expected.out_dir = "runs";
  EXPECT_EQ(c, expected);
}

TEST(ConfigParseTest, OverridesAndRoundTrip) {
  const std::string text =
      "ablation_tag: no_freq\n"
      "corpus_dir: data/train\n"
      "out_dir: runs/x\n"
      "train:\n"
      "  epochs: 3\n"
      "  batch_size: 4\n"
      "  seed: 12\n"
      "  loss_cfg:\n"
      "    spectral_scales: [32, 64]\n"
      "model:\n"
      "  base_channels: 8\n"
      "  strides: [2, 2, 2]\n"
      "synth:\n"
      "  max_f0_hz: 250\n";
  const ExperimentConfig c = parse_experiment_config(text);
  EXPECT_EQ(c.ablation_tag, AblationTag::kNoFreq);
  EXPECT_EQ(c.corpus_dir, "data/train");
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_EQ(c.train.seed, 12u);
  EXPECT_FALSE(c.train.loss_cfg.include_spectral);
  EXPECT_EQ(c.train.loss_cfg.spectral_scales, (std::vector<int>{32, 64}));
  EXPECT_EQ(c.model.strides, (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(c.synth.max_f0_hz, 250.0);
  EXPECT_EQ(parse_experiment_config(to_yaml(c)), c);
}

int error_line(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

TEST(ConfigParseTest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("ablation_tag: optimal\ntrain:\n  epochz: 3\n"), 3);
  EXPECT_EQ(error_line("train:\n  lr: fast\n"), 2);
  EXPECT_EQ(error_line("ablation_tag: best\n"), 1);
  EXPECT_EQ(error_line("train:\n  beta1: 1.5\n"), 2);
  EXPECT_EQ(error_line("model:\n  strides: [2, 2]\n"), 2);
  EXPECT_EQ(error_line("train: [1, 2\n"), 2);  // reported where the flow ends
  EXPECT_GT(error_line("ablation_tag: no_freq\ntrain:\n  loss_cfg:\n    include_spectral: true\n"),
            0);
  EXPECT_EQ(error_line("ablation_tag: unfiltered\ntrain:\n  filter_refs: true\n"), 3);
  EXPECT_EQ(error_line("ablation_tag: nda5\ntrain:\n  snr_levels_db: [3]\n"), 3);
}

TEST(ConfigParseTest, ConsistentExplicitSettingsAreAccepted) {
  const ExperimentConfig c =
      parse_experiment_config("ablation_tag: unfiltered\ntrain:\n  filter_refs: false\n");
  EXPECT_FALSE(c.train.filter_refs);
}

TEST(ConfigLoadTest, MissingFileAndLineFromFile) {
  EXPECT_THROW(load_experiment_config("/nonexistent/cfg.yaml"), ConfigError);
  testing::TempDir dir;
  testing::write_file(dir / "bad.yaml", "train:\n  epochs: 2\n  lr: -1\n");
  try {
    load_experiment_config(dir / "bad.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("bad.yaml"), std::string::npos);
  }
}

}  // namespace
}  // namespace eggcodec
