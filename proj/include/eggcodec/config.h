// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_CONFIG_H_
#define EGGCODEC_CONFIG_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "eggcodec/nn/model.h"
#include "eggcodec/synth.h"
#include "eggcodec/trainer.h"

namespace eggcodec {

enum class AblationTag {
  kOptimal,
  kCos,
  kL1L2,
  kNoTime,
  kNoFreq,
  kNda5,
  kNda7,
  kNoNda,
  kNoGanPlaceholder,
  kUnfiltered,
};

inline constexpr std::array<AblationTag, 10> kAllAblationTags = {
    AblationTag::kOptimal, AblationTag::kCos,   AblationTag::kL1L2,
    AblationTag::kNoTime,  AblationTag::kNoFreq, AblationTag::kNda5,
    AblationTag::kNda7,    AblationTag::kNoNda,  AblationTag::kNoGanPlaceholder,
    AblationTag::kUnfiltered};

std::string_view to_string(AblationTag tag);
std::optional<AblationTag> parse_ablation_tag(std::string_view name);

// The loss terms, SNR levels and reference filtering selected by a tag.
struct AblationToggles {
  bool include_spectral = true;
  bool include_time_l1l2 = true;
  bool include_time_cos = true;
  std::vector<double> snr_levels_db;
  bool filter_refs = true;
};

AblationToggles ablation_toggles(AblationTag tag);

struct ExperimentConfig {
  TrainConfig train;
  nn::ModelConfig model;
  std::filesystem::path corpus_dir = "corpus";
  std::filesystem::path eval_dir = "eval";
  AblationTag ablation_tag = AblationTag::kOptimal;
  std::filesystem::path out_dir = "runs";
  SynthRanges synth;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Defaults with the tag's toggles applied; out_dir is runs/<tag>.
ExperimentConfig expand_tag(AblationTag tag);

// Parses YAML with the field names of ExperimentConfig (train.loss_cfg nests
// the loss settings; synth holds the random-corpus ranges). Missing fields
// keep their defaults, then the tag's toggles are applied. Unknown keys,
// type errors, invalid values and explicit settings that contradict the tag
// throw ConfigError with the 1-based line number.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Canonical YAML rendering; parse_experiment_config(to_yaml(c)) == c.
std::string to_yaml(const ExperimentConfig& cfg);

// Throws std::invalid_argument for inconsistent ranges.
void validate(const SynthRanges& r);

}  // namespace eggcodec

#endif  // EGGCODEC_CONFIG_H_
