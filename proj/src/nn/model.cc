// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/nn/model.h"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace eggcodec::nn {
namespace {

constexpr Padding kPad = Padding::kSame;

std::string idx(const std::string& base, std::size_t i) {
  return base + "." + std::to_string(i);
}

}  // namespace

void validate(const ModelConfig& cfg) {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
  };
  positive(cfg.base_channels, "base_channels");
  positive(cfg.n_down_blocks, "n_down_blocks");
  positive(cfg.residual_units_per_block, "residual_units_per_block");
  positive(cfg.latent_dim, "latent_dim");
  positive(cfg.rvq_stages, "rvq_stages");
  if (static_cast<int>(cfg.strides.size()) != cfg.n_down_blocks) {
    throw std::invalid_argument("strides must have n_down_blocks entries");
  }
  for (int s : cfg.strides) positive(s, "stride");
  for (int d : cfg.timing_dilations) positive(d, "timing dilation");
  if (cfg.codebook_size < 2) throw std::invalid_argument("codebook_size must be >= 2");
  if (!(cfg.commitment_weight >= 0.0)) {
    throw std::invalid_argument("commitment_weight must be >= 0");
  }
}

int total_stride(const ModelConfig& cfg) {
  int s = 1;
  for (int v : cfg.strides) s *= v;
  return s;
}

int block_width(const ModelConfig& cfg, int i) {
  return i == 0 ? cfg.base_channels : 2 * cfg.base_channels;
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  std::mt19937_64 rng(seed);
  const int nb = cfg_.n_down_blocks;
  const int top = block_width(cfg_, nb);

  enc_in_ = Conv1dLayer(1, cfg_.base_channels, 7, {1, 1, kPad}, rng);
  for (int b = 0; b < nb; ++b) {
    const int c = block_width(cfg_, b);
    std::vector<ResidualUnit> units;
    for (int u = 0; u < cfg_.residual_units_per_block; ++u) {
      units.emplace_back(c, 1, kPad, rng);
    }
    enc_res_.push_back(std::move(units));
    const int s = cfg_.strides[static_cast<std::size_t>(b)];
    enc_down_.emplace_back(c, block_width(cfg_, b + 1), 2 * s, ConvSpec{s, 1, kPad}, rng);
  }
  for (int d : cfg_.timing_dilations) enc_timing_.emplace_back(top, d, kPad, rng);
  enc_out_ = Conv1dLayer(top, cfg_.latent_dim, 3, {1, 1, kPad}, rng);

  dec_in_ = Conv1dLayer(cfg_.latent_dim, top, 3, {1, 1, kPad}, rng);
  for (int d : cfg_.timing_dilations) dec_timing_.emplace_back(top, d, kPad, rng);
  for (int b = nb - 1; b >= 0; --b) {
    const int s = cfg_.strides[static_cast<std::size_t>(b)];
    const int c = block_width(cfg_, b);
    dec_up_.emplace_back(block_width(cfg_, b + 1), c, 2 * s, s, kPad, rng);
    std::vector<ResidualUnit> units;
    for (int u = 0; u < cfg_.residual_units_per_block; ++u) {
      units.emplace_back(c, 1, kPad, rng);
    }
    dec_res_.push_back(std::move(units));
  }
  dec_out_ = Conv1dLayer(cfg_.base_channels, 1, 7, {1, 1, kPad}, rng);

  rvq_ = ResidualVectorQuantizer(cfg_.rvq_stages, cfg_.codebook_size, cfg_.latent_dim,
                                 cfg_.commitment_weight, rng());

  enc_in_.collect("encoder.in", params_);
  for (std::size_t b = 0; b < enc_down_.size(); ++b) {
    for (std::size_t u = 0; u < enc_res_[b].size(); ++u) {
      enc_res_[b][u].collect(idx(idx("encoder.block", b) + ".res", u), params_);
    }
    enc_down_[b].collect(idx("encoder.block", b) + ".down", params_);
  }
  for (std::size_t i = 0; i < enc_timing_.size(); ++i) {
    enc_timing_[i].collect(idx("encoder.timing", i), params_);
  }
  enc_out_.collect("encoder.out", params_);
  dec_in_.collect("decoder.in", params_);
  for (std::size_t i = 0; i < dec_timing_.size(); ++i) {
    dec_timing_[i].collect(idx("decoder.timing", i), params_);
  }
  for (std::size_t b = 0; b < dec_up_.size(); ++b) {
    dec_up_[b].collect(idx("decoder.block", b) + ".up", params_);
    for (std::size_t u = 0; u < dec_res_[b].size(); ++u) {
      dec_res_[b][u].collect(idx(idx("decoder.block", b) + ".res", u), params_);
    }
  }
  dec_out_.collect("decoder.out", params_);
}

void Model::check_length(int t) const {
  const int s = total_stride(cfg_);
  if (t <= 0 || t % s != 0) {
    throw std::invalid_argument("input length " + std::to_string(t) +
                                " is not a positive multiple of " + std::to_string(s));
  }
}

Var Model::encode(Tape& tape, const Var& audio) const {
  if (audio->value.rank() != 3 || audio->value.channels() != 1) {
    throw std::invalid_argument("encoder expects (B, 1, T) audio");
  }
  check_length(audio->value.time());
  Var h = enc_in_.forward(tape, audio);
  for (std::size_t b = 0; b < enc_down_.size(); ++b) {
    for (const ResidualUnit& u : enc_res_[b]) h = u.forward(tape, h);
    h = enc_down_[b].forward(tape, elu(tape, h));
  }
  for (const ResidualUnit& u : enc_timing_) h = u.forward(tape, h);
  return enc_out_.forward(tape, elu(tape, h));
}

Var Model::decode(Tape& tape, const Var& quantized) const {
  if (quantized->value.rank() != 3 || quantized->value.channels() != cfg_.latent_dim) {
    throw std::invalid_argument("decoder expects (B, latent_dim, T) input");
  }
  Var h = dec_in_.forward(tape, quantized);
  for (const ResidualUnit& u : dec_timing_) h = u.forward(tape, h);
  for (std::size_t b = 0; b < dec_up_.size(); ++b) {
    h = dec_up_[b].forward(tape, elu(tape, h));
    for (const ResidualUnit& u : dec_res_[b]) h = u.forward(tape, h);
  }
  return tanh(tape, dec_out_.forward(tape, elu(tape, h)));
}

ForwardResult Model::forward(Tape& tape, const Tensor& audio, const ForwardOptions& opts) {
  ForwardResult r;
  r.latent = encode(tape, constant(audio));
  if (opts.bypass_quantizer) {
    r.quantized = r.latent;
    r.commit = constant(Tensor({1}, 0.0));
  } else {
    r.quantized = rvq_.forward(tape, r.latent, opts.train, &r.commit, &r.codes);
  }
  r.pred = decode(tape, r.quantized);
  return r;
}

Tensor Model::infer(const Tensor& audio) const {
  Tape tape(false);
  Var latent = encode(tape, constant(audio));
  if (!rvq_.initialized()) return decode(tape, latent)->value;
  Tensor q = rvq_.quantize(latent->value).quantized;
  return decode(tape, constant(std::move(q)))->value;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const NamedParameter& p : params_) n += p.var->value.size();
  return n;
}

}  // namespace eggcodec::nn
