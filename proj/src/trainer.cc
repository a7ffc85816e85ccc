// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/trainer.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "eggcodec/errors.h"
#include "eggcodec/nn/checkpoint.h"
#include "eggcodec/synth.h"

namespace eggcodec {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ull;

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0)) throw std::invalid_argument("beta1 must be in (0, 1)");
  if (!(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) throw std::invalid_argument("beta2 must be in (0, 1)");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (cfg.crop_len <= 0 || cfg.crop_len % 16 != 0) {
    throw std::invalid_argument("crop_len must be a positive multiple of 16");
  }
  if (cfg.snr_levels_db.empty()) throw std::invalid_argument("snr_levels_db is empty");
  for (double s : cfg.snr_levels_db) {
    if (std::isnan(s)) throw std::invalid_argument("snr level is NaN");
  }
  validate(cfg.loss_cfg);
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: parameter and gradient counts differ");
  }
  if (state.m.empty() && state.t == 0) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || state.m[i].size() != params[i].size()) {
      throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                  std::to_string(i));
    }
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::span<double> p = params[i];
    std::span<const double> g = grads[i];
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void adam_step(const nn::ParameterList& params, AdamState& state, const TrainConfig& cfg) {
  std::vector<std::span<double>> ps;
  std::vector<std::span<const double>> gs;
  std::vector<std::vector<double>> zeros;
  zeros.reserve(params.size());
  for (const nn::NamedParameter& p : params) {
    ps.emplace_back(p.var->value.data());
    if (p.var->grad.size() == p.var->value.size()) {
      gs.emplace_back(p.var->grad.data());
    } else {
      zeros.emplace_back(p.var->value.size(), 0.0);
      gs.emplace_back(zeros.back());
    }
  }
  adam_step(ps, gs, state, cfg);
}

Corpus prepare_corpus(Corpus corpus, const TrainConfig& cfg) {
  for (TrainingPair& p : corpus) {
    if (p.audio.sample_rate_hz != kPipelineRate || p.egg.sample_rate_hz != kPipelineRate) {
      throw DataError(p.id + ": expected " + std::to_string(kPipelineRate) + " Hz input");
    }
    if (p.audio.size() != p.egg.size()) {
      throw DataError(p.id + ": speech and EGG lengths differ (" +
                      std::to_string(p.audio.size()) + " vs " +
                      std::to_string(p.egg.size()) + ")");
    }
    if (cfg.filter_refs && !p.egg_highpassed) {
      p.egg = highpass_filter(p.egg).signal;
      p.egg_highpassed = true;
      p.normalized = false;
    } else if (!cfg.filter_refs && p.egg_highpassed) {
      throw DataError(p.id + ": EGG is already high-pass filtered but filter_refs is off");
    }
    if (!p.normalized) {
      p.audio = peak_normalize(p.audio);
      p.egg = peak_normalize(p.egg);
      p.normalized = true;
    }
  }
  return corpus;
}

Batch make_batch(const Corpus& corpus, std::span<const std::size_t> items,
                 const TrainConfig& cfg, std::uint64_t step) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  const int len = cfg.crop_len;
  Batch batch;
  std::vector<double> audio, egg;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const std::size_t idx = items[k];
    if (idx >= corpus.size()) throw std::invalid_argument("make_batch: item out of range");
    const TrainingPair& p = corpus[idx];
    if (p.egg.size() < static_cast<std::size_t>(len) || p.audio.size() != p.egg.size()) {
      throw DataError(p.id + ": utterance shorter than crop_len " + std::to_string(len));
    }
    std::mt19937_64 rng(derive_seed(cfg.seed, step, k));
    std::uniform_int_distribution<std::size_t> offset_dist(0, p.egg.size() - len);
    std::size_t offset = 0;
    bool found = false;
    for (int attempt = 0; attempt <= kMaxCropRedraws && !found; ++attempt) {
      offset = offset_dist(rng);
      found = rms(std::span(p.egg.samples).subspan(offset, len)) >= kSilentCropRms;
    }
    if (!found) {
      ++batch.skipped;
      continue;
    }
    std::uniform_int_distribution<std::size_t> level(0, cfg.snr_levels_db.size() - 1);
    const double snr = cfg.snr_levels_db[level(rng)];
    const std::uint64_t noise_seed = rng();
    SignalBuffer crop{{p.audio.samples.begin() + offset,
                       p.audio.samples.begin() + offset + len},
                      p.audio.sample_rate_hz};
    crop = add_white_noise_snr(crop, snr, noise_seed);
    audio.insert(audio.end(), crop.samples.begin(), crop.samples.end());
    egg.insert(egg.end(), p.egg.samples.begin() + offset,
               p.egg.samples.begin() + offset + len);
    batch.items.push_back(idx);
    batch.offsets.push_back(offset);
    batch.snr_db.push_back(snr);
  }
  const int b = static_cast<int>(batch.items.size());
  batch.audio = nn::Tensor({b, 1, len}, std::move(audio));
  batch.egg = nn::Tensor({b, 1, len}, std::move(egg));
  return batch;
}

void write_loss_csv_header(std::ostream& out) {
  out << "step,l_s,l_t,l_cos,l_reco,commit\n";
}

void write_loss_csv_row(const StepLoss& s, std::ostream& out) {
  out << s.step << ',' << shortest(s.l_s) << ',' << shortest(s.l_t) << ','
      << shortest(s.l_cos) << ',' << shortest(s.l_reco) << ',' << shortest(s.commit)
      << '\n';
}

FitResult fit(nn::Model& model, const Corpus& corpus, const TrainConfig& cfg,
              const FitOptions& options) {
  validate(cfg);
  FitResult result;
  if (cfg.epochs == 0) return result;
  if (corpus.empty()) throw DataError("training corpus is empty");
  if (cfg.crop_len % nn::total_stride(model.config()) != 0) {
    throw std::invalid_argument("crop_len is not a multiple of the model stride");
  }
  const std::size_t n = corpus.size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = std::max<std::size_t>(1, (n + bs - 1) / bs);
  AdamState adam;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      ++step;
      const std::size_t begin = s * bs;
      const std::size_t end = std::min(n, begin + bs);
      Batch batch = make_batch(corpus, std::span(order).subspan(begin, end - begin), cfg,
                               static_cast<std::uint64_t>(step));
      result.skipped_items += static_cast<std::int64_t>(batch.skipped);
      if (batch.items.empty()) {
        throw DataError("step " + std::to_string(step) + ": every crop was silent");
      }
      const int b = static_cast<int>(batch.items.size());
      const int len = cfg.crop_len;

      nn::Tape tape;
      nn::ForwardResult fwd = model.forward(tape, batch.audio, {.train = true});
      if (!fwd.pred->value.all_finite()) {
        throw NumericAbort("non-finite model output at step " + std::to_string(step));
      }
      StepLoss rec;
      rec.step = step;
      nn::Tensor grad = nn::Tensor::zeros_like(fwd.pred->value);
      for (int i = 0; i < b; ++i) {
        SignalBuffer pred{{fwd.pred->value.item(i), fwd.pred->value.item(i) + len},
                          kPipelineRate};
        SignalBuffer ref{{batch.egg.item(i), batch.egg.item(i) + len}, kPipelineRate};
        ReconstructionLoss l;
        try {
          l = reconstruction_loss(pred, ref, cfg.loss_cfg);
        } catch (const DegenerateInputError& e) {
          throw NumericAbort("step " + std::to_string(step) + ": " + e.what());
        }
        rec.l_s += l.report.l_s / b;
        rec.l_t += l.report.l_t / b;
        rec.l_cos += l.report.l_cos / b;
        rec.l_reco += l.report.l_reco / b;
        double* g = grad.item(i);
        for (int j = 0; j < len; ++j) g[j] = l.grad[static_cast<std::size_t>(j)] / b;
      }
      rec.commit = fwd.commit->value[0];
      if (!std::isfinite(rec.l_reco) || !std::isfinite(rec.commit)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << ": l_s=" << rec.l_s
            << " l_t=" << rec.l_t << " l_cos=" << rec.l_cos << " l_reco=" << rec.l_reco
            << " commit=" << rec.commit;
        throw NumericAbort(msg.str());
      }
      nn::Var reco = nn::external_scalar(tape, rec.l_reco, fwd.pred, std::move(grad));
      nn::Var total = nn::sum(tape, {reco, fwd.commit});
      tape.backward(total);
      adam_step(model.parameters(), adam, cfg);
      result.curve.push_back(rec);
      if (options.on_step) options.on_step(rec);
    }
    if (!options.checkpoint_path.empty()) {
      nn::save_checkpoint(model, options.checkpoint_path);
    }
  }
  return result;
}

}  // namespace eggcodec
