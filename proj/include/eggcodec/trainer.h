// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_TRAINER_H_
#define EGGCODEC_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eggcodec/losses.h"
#include "eggcodec/nn/model.h"
#include "eggcodec/preprocess.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 14;
  int epochs = 20;
  int crop_len = 16000;
  std::vector<double> snr_levels_db = {3.0, 5.0, 7.0, kCleanSnr};
  std::uint64_t seed = 0;
  LossConfig loss_cfg;
  bool filter_refs = true;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws std::invalid_argument for betas outside (0, 1), lr or epsilon <= 0,
// batch_size < 1, epochs < 0, a crop length that is not a positive multiple of
// 16, an empty SNR list or a NaN level, or an invalid loss_cfg.
void validate(const TrainConfig& cfg);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t t = 0;
};

// One Adam update over a list of parameter arrays: t is incremented, then
// m <- b1 m + (1 - b1) g, v <- b2 v + (1 - b2) g^2 and
// p <- p - lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected moments.
// Moments are allocated on the first call. Throws std::invalid_argument when
// the shapes disagree with each other or with the state.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state,
               const TrainConfig& cfg);

// Same, reading gradients from the parameters' grad slots (missing grads
// count as zero).
void adam_step(const nn::ParameterList& params, AdamState& state, const TrainConfig& cfg);

struct TrainingPair {
  std::string id;
  SignalBuffer audio;
  SignalBuffer egg;
  bool egg_highpassed = false;
  bool normalized = false;
};

using Corpus = std::vector<TrainingPair>;

// Applies the training-time preprocessing to each pair: EGG high-pass iff
// filter_refs (skipped when already applied) and peak normalization of both
// signals. Throws DataError for a rate other than the pipeline rate,
// mismatched lengths, or an already-filtered EGG when filter_refs is false.
Corpus prepare_corpus(Corpus corpus, const TrainConfig& cfg);

struct Batch {
  nn::Tensor audio;  // (B, 1, crop_len)
  nn::Tensor egg;    // (B, 1, crop_len)
  std::vector<std::size_t> items;  // corpus index per row
  std::vector<std::size_t> offsets;
  std::vector<double> snr_db;
  std::size_t skipped = 0;  // items dropped by the silence guard
};

inline constexpr double kSilentCropRms = 1e-4;
inline constexpr int kMaxCropRedraws = 10;

// Crops each requested item at a uniform random offset, redrawing up to
// kMaxCropRedraws times while the EGG crop RMS is below kSilentCropRms (then
// the item is skipped), and adds white noise at a level drawn uniformly from
// snr_levels_db. Item k's randomness comes from derive_seed(seed, step, k),
// so the result does not depend on assembly order. Throws DataError on an
// empty corpus or an utterance shorter than crop_len.
Batch make_batch(const Corpus& corpus, std::span<const std::size_t> items,
                 const TrainConfig& cfg, std::uint64_t step);

struct StepLoss {
  std::int64_t step = 0;  // 1-based
  double l_s = 0.0;
  double l_t = 0.0;
  double l_cos = 0.0;
  double l_reco = 0.0;
  double commit = 0.0;

  friend bool operator==(const StepLoss&, const StepLoss&) = default;
};

void write_loss_csv_header(std::ostream& out);
void write_loss_csv_row(const StepLoss& s, std::ostream& out);

struct FitOptions {
  // Written (atomically replaced) after every epoch when non-empty.
  std::filesystem::path checkpoint_path;
  // Called after every step.
  std::function<void(const StepLoss&)> on_step;
};

struct FitResult {
  std::vector<StepLoss> curve;
  std::int64_t skipped_items = 0;
};

// Trains in place. Each epoch runs max(1, ceil(n / batch_size)) steps over a
// fresh permutation of the corpus; each step minimizes the mean
// reconstruction loss over the batch plus the commitment loss. `corpus` must
// already be prepared. Throws NumericAbort on a non-finite loss.
FitResult fit(nn::Model& model, const Corpus& corpus, const TrainConfig& cfg,
              const FitOptions& options = {});

}  // namespace eggcodec

#endif  // EGGCODEC_TRAINER_H_
