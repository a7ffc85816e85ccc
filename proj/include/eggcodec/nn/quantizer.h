// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_QUANTIZER_H_
#define EGGCODEC_NN_QUANTIZER_H_

#include <cstdint>
#include <random>
#include <vector>

#include "eggcodec/nn/autodiff.h"

namespace eggcodec::nn {

struct Codebook {
  Tensor vectors;                         // (codebook_size, dim)
  std::vector<std::int64_t> usage_counts; // assignments since creation
  // EMA state.
  Tensor ema_sum;
  std::vector<double> ema_count;
  std::vector<int> idle_steps;

  int size() const { return vectors.empty() ? 0 : vectors.dim(0); }
  int dim() const { return vectors.empty() ? 0 : vectors.dim(1); }
  const double* code(int k) const {
    return vectors.data().data() + static_cast<std::size_t>(k) * dim();
  }

  // Resets the EMA state to "each code seen once at its current value".
  void reset_ema();
};

// Index of the nearest code by squared Euclidean distance; ties go to the
// lowest index.
int nearest_code(const Codebook& cb, const double* v);

struct RvqResult {
  Tensor quantized;                     // same shape as the latent
  std::vector<std::vector<int>> indices;  // [stage][b * T + t]
  // Squared residual norm summed over all vectors after each stage.
  std::vector<double> stage_error;
};

struct RvqOptions {
  double decay = 0.99;
  double laplace_eps = 1e-5;
  int dead_code_steps = 100;
};

// Residual vector quantizer over latent vectors of a (B, D, T) tensor.
class ResidualVectorQuantizer {
 public:
  ResidualVectorQuantizer() = default;
  ResidualVectorQuantizer(int stages, int codebook_size, int dim,
                          double commitment_weight, std::uint64_t seed,
                          RvqOptions options = {});

  // Pure lookup with the current codebooks.
  RvqResult quantize(const Tensor& latent) const;

  // Straight-through quantization recorded on the tape. Returns the
  // quantized activations and adds the commitment term to `commit`.
  // With `train` set, codebooks are initialized from the batch on first use
  // and then updated by EMA after the lookup.
  Var forward(Tape& tape, const Var& latent, bool train, Var* commit,
              RvqResult* result = nullptr);

  double commitment_weight() const { return commitment_weight_; }
  bool initialized() const { return initialized_; }
  void set_initialized(bool v) { initialized_ = v; }
  std::vector<Codebook>& codebooks() { return codebooks_; }
  const std::vector<Codebook>& codebooks() const { return codebooks_; }

 private:
  void init_from_batch(const Tensor& latent);
  void ema_update(int stage, const std::vector<double>& inputs, int n,
                  const std::vector<int>& assign);

  std::vector<Codebook> codebooks_;
  double commitment_weight_ = 0.25;
  RvqOptions options_;
  std::mt19937_64 rng_;
  bool initialized_ = false;
};

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_QUANTIZER_H_
