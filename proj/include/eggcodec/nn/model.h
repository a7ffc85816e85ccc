// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_MODEL_H_
#define EGGCODEC_NN_MODEL_H_

#include <cstdint>
#include <vector>

#include "eggcodec/nn/autodiff.h"
#include "eggcodec/nn/layers.h"
#include "eggcodec/nn/quantizer.h"

namespace eggcodec::nn {

struct ModelConfig {
  int base_channels = 16;
  int n_down_blocks = 3;
  std::vector<int> strides = {2, 2, 4};
  int residual_units_per_block = 1;
  int latent_dim = 32;
  std::vector<int> timing_dilations = {1, 2, 4};
  int rvq_stages = 2;
  int codebook_size = 64;
  double commitment_weight = 0.25;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws std::invalid_argument when a dimension is < 1, the stride list does
// not have n_down_blocks entries, codebook_size < 2 or the weight is negative.
void validate(const ModelConfig& cfg);

int total_stride(const ModelConfig& cfg);

// Channel width entering down block i (i = n_down_blocks gives the width after
// the last block). Doubles once, then stays at 2 * base_channels.
int block_width(const ModelConfig& cfg, int i);

struct ForwardOptions {
  bool train = false;         // lazy codebook init + EMA updates
  bool bypass_quantizer = false;
};

struct ForwardResult {
  Var pred;       // (B, 1, T)
  Var latent;     // (B, latent_dim, T / stride)
  Var quantized;  // decoder input
  Var commit;     // scalar; zero when bypassed
  RvqResult codes;
};

// Encoder -> residual vector quantizer -> decoder. Encoder: conv k7, then per
// block residual units and a strided conv (kernel 2 * stride), a stack of
// dilated residual units for timing, and a k3 projection to latent_dim. The
// decoder mirrors it with transposed convs and ends in a k7 conv and tanh.
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);
  // Parameters are shared handles; copying would alias them.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return cfg_; }

  Var encode(Tape& tape, const Var& audio) const;
  Var decode(Tape& tape, const Var& quantized) const;
  // `audio` is (B, 1, T) with T divisible by total_stride.
  ForwardResult forward(Tape& tape, const Tensor& audio, const ForwardOptions& opts);

  // Forward pass without recording or codebook updates. The quantizer is
  // skipped while its codebooks have never been fitted to data.
  Tensor infer(const Tensor& audio) const;

  const ParameterList& parameters() const { return params_; }
  std::size_t parameter_count() const;
  ResidualVectorQuantizer& quantizer() { return rvq_; }
  const ResidualVectorQuantizer& quantizer() const { return rvq_; }

 private:
  void check_length(int t) const;

  ModelConfig cfg_;
  Conv1dLayer enc_in_;
  std::vector<std::vector<ResidualUnit>> enc_res_;
  std::vector<Conv1dLayer> enc_down_;
  std::vector<ResidualUnit> enc_timing_;
  Conv1dLayer enc_out_;

  Conv1dLayer dec_in_;
  std::vector<ResidualUnit> dec_timing_;
  std::vector<ConvTranspose1dLayer> dec_up_;
  std::vector<std::vector<ResidualUnit>> dec_res_;
  Conv1dLayer dec_out_;

  ResidualVectorQuantizer rvq_;
  ParameterList params_;
};

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_MODEL_H_
