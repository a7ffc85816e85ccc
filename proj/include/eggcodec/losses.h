// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_LOSSES_H_
#define EGGCODEC_LOSSES_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "eggcodec/signal_buffer.h"

namespace eggcodec {

struct LossConfig {
  // Divides time-domain L1+L2 inside L_t and multiplies L_t inside L_reco.
  double lambda = 100.0;
  // Window lengths 2^5 .. 2^10.
  std::vector<int> spectral_scales = {32, 64, 128, 256, 512, 1024};
  bool include_spectral = true;
  bool include_time_l1l2 = true;
  bool include_time_cos = true;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

// Throws std::invalid_argument on lambda <= 0, an empty scale list or a scale
// that is not a power of two in [32, 1024].
void validate(const LossConfig& cfg);

// A scalar loss and its gradient with respect to the first argument. `grad`
// is empty when the caller asked for the value only.
struct LossValue {
  double value = 0.0;
  std::vector<double> grad;
};

// All terms of the reconstruction loss for one (pred, ref) pair. The
// adversarial and entropy-coding terms are not modelled and stay zero.
struct LossReport {
  double l_s = 0.0;
  double l_cos = 0.0;
  double l_l1 = 0.0;
  double l_l2 = 0.0;
  double l_t = 0.0;
  double l_reco = 0.0;
  double l_g = 0.0;
  double l_d = 0.0;
  double l_l = 0.0;
};

void to_json(nlohmann::json& j, const LossReport& r);
void from_json(const nlohmann::json& j, LossReport& r);

struct ReconstructionLoss {
  LossReport report;
  std::vector<double> grad;
};

// Mean over scales of [mean |dS| + sqrt(mean dS^2)], dS the log-mel
// difference at that window length. Requires equal length and rate and at
// least as many samples as the largest scale.
LossValue spectral_loss(const SignalBuffer& pred, const SignalBuffer& ref,
                        const LossConfig& cfg, bool with_grad = true);

// 1 - <y1, y2> / (|y1| |y2|), clamped to [0, 2]. Throws DegenerateInputError
// if either vector has zero norm.
LossValue cosine_distance(std::span<const double> y1, std::span<const double> y2,
                          bool with_grad = true);

// (mean |d| + mean d^2) / lambda + cosine_distance(pred, ref).
LossValue time_loss(std::span<const double> pred, std::span<const double> ref,
                    const LossConfig& cfg, bool with_grad = true);

// l_reco = [spectral] l_s + lambda * l_t, where l_t keeps only the enabled
// time-domain parts. Disabled terms are reported as zero. Throws
// std::invalid_argument when every term is disabled.
ReconstructionLoss reconstruction_loss(const SignalBuffer& pred,
                                       const SignalBuffer& ref,
                                       const LossConfig& cfg,
                                       bool with_grad = true);

}  // namespace eggcodec

#endif  // EGGCODEC_LOSSES_H_
