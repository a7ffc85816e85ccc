// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/nn/quantizer.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace eggcodec::nn {
namespace {

// Latent (B, D, T) to row-per-vector layout (B*T, D).
std::vector<double> to_rows(const Tensor& latent) {
  const int b = latent.batch(), d = latent.channels(), t = latent.time();
  std::vector<double> rows(latent.size());
  for (int i = 0; i < b; ++i) {
    for (int c = 0; c < d; ++c) {
      for (int j = 0; j < t; ++j) {
        rows[(static_cast<std::size_t>(i) * t + j) * d + c] = latent.at(i, c, j);
      }
    }
  }
  return rows;
}

Tensor from_rows(const std::vector<double>& rows, const std::vector<int>& shape) {
  Tensor out(shape);
  const int b = shape[0], d = shape[1], t = shape[2];
  for (int i = 0; i < b; ++i) {
    for (int c = 0; c < d; ++c) {
      for (int j = 0; j < t; ++j) {
        out.at(i, c, j) = rows[(static_cast<std::size_t>(i) * t + j) * d + c];
      }
    }
  }
  return out;
}

struct StagePass {
  std::vector<double> quantized;
  std::vector<std::vector<double>> stage_inputs;
  std::vector<std::vector<int>> indices;
  std::vector<double> stage_error;
};

StagePass run_stages(const std::vector<Codebook>& books, std::vector<double> residual,
                     int n, int d, bool keep_inputs) {
  StagePass p;
  p.quantized.assign(residual.size(), 0.0);
  for (const Codebook& cb : books) {
    if (keep_inputs) p.stage_inputs.push_back(residual);
    std::vector<int> idx(static_cast<std::size_t>(n));
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double* r = residual.data() + static_cast<std::size_t>(i) * d;
      double* q = p.quantized.data() + static_cast<std::size_t>(i) * d;
      const int k = nearest_code(cb, r);
      idx[static_cast<std::size_t>(i)] = k;
      const double* c = cb.code(k);
      for (int j = 0; j < d; ++j) {
        q[j] += c[j];
        r[j] -= c[j];
        err += r[j] * r[j];
      }
    }
    p.indices.push_back(std::move(idx));
    p.stage_error.push_back(err);
  }
  return p;
}

}  // namespace

void Codebook::reset_ema() {
  ema_sum = vectors;
  ema_count.assign(static_cast<std::size_t>(size()), 1.0);
  idle_steps.assign(static_cast<std::size_t>(size()), 0);
  if (usage_counts.size() != static_cast<std::size_t>(size())) {
    usage_counts.assign(static_cast<std::size_t>(size()), 0);
  }
}

int nearest_code(const Codebook& cb, const double* v) {
  if (cb.size() == 0) throw std::invalid_argument("empty codebook");
  const int d = cb.dim();
  int best = 0;
  double best_dist = 0.0;
  for (int k = 0; k < cb.size(); ++k) {
    const double* c = cb.code(k);
    double dist = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = v[j] - c[j];
      dist += diff * diff;
    }
    if (k == 0 || dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

ResidualVectorQuantizer::ResidualVectorQuantizer(int stages, int codebook_size,
                                                 int dim, double commitment_weight,
                                                 std::uint64_t seed,
                                                 RvqOptions options)
    : commitment_weight_(commitment_weight), options_(options), rng_(seed) {
  if (stages < 1 || codebook_size < 2 || dim < 1) {
    throw std::invalid_argument("quantizer needs >= 1 stage, >= 2 codes, dim >= 1");
  }
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int s = 0; s < stages; ++s) {
    Codebook cb;
    cb.vectors = Tensor({codebook_size, dim});
    for (double& v : cb.vectors.data()) v = dist(rng_);
    cb.usage_counts.assign(static_cast<std::size_t>(codebook_size), 0);
    cb.reset_ema();
    codebooks_.push_back(std::move(cb));
  }
}

RvqResult ResidualVectorQuantizer::quantize(const Tensor& latent) const {
  if (codebooks_.empty()) throw std::invalid_argument("quantizer has no codebooks");
  if (latent.rank() != 3 || latent.channels() != codebooks_[0].dim()) {
    throw std::invalid_argument("latent dimension does not match the codebooks");
  }
  const int d = latent.channels();
  const int n = latent.batch() * latent.time();
  StagePass p = run_stages(codebooks_, to_rows(latent), n, d, false);
  return {from_rows(p.quantized, latent.shape()), std::move(p.indices),
          std::move(p.stage_error)};
}

void ResidualVectorQuantizer::init_from_batch(const Tensor& latent) {
  const int d = latent.channels();
  const int n = latent.batch() * latent.time();
  std::vector<double> residual = to_rows(latent);
  for (Codebook& cb : codebooks_) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    for (int k = 0; k < cb.size(); ++k) {
      const int src = order[static_cast<std::size_t>(k % n)];
      std::copy_n(residual.data() + static_cast<std::size_t>(src) * d, d,
                  cb.vectors.data().data() + static_cast<std::size_t>(k) * d);
    }
    cb.reset_ema();
    for (int i = 0; i < n; ++i) {
      double* r = residual.data() + static_cast<std::size_t>(i) * d;
      const double* c = cb.code(nearest_code(cb, r));
      for (int j = 0; j < d; ++j) r[j] -= c[j];
    }
  }
  initialized_ = true;
}

void ResidualVectorQuantizer::ema_update(int stage, const std::vector<double>& inputs,
                                         int n, const std::vector<int>& assign) {
  Codebook& cb = codebooks_[static_cast<std::size_t>(stage)];
  const int k_total = cb.size(), d = cb.dim();
  const double decay = options_.decay;
  std::vector<double> counts(static_cast<std::size_t>(k_total), 0.0);
  std::vector<double> sums(static_cast<std::size_t>(k_total) * d, 0.0);
  for (int i = 0; i < n; ++i) {
    const int k = assign[static_cast<std::size_t>(i)];
    counts[static_cast<std::size_t>(k)] += 1.0;
    for (int j = 0; j < d; ++j) {
      sums[static_cast<std::size_t>(k) * d + j] += inputs[static_cast<std::size_t>(i) * d + j];
    }
  }
  double total = 0.0;
  for (int k = 0; k < k_total; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    cb.ema_count[ku] = decay * cb.ema_count[ku] + (1.0 - decay) * counts[ku];
    for (int j = 0; j < d; ++j) {
      double& s = cb.ema_sum[ku * d + j];
      s = decay * s + (1.0 - decay) * sums[ku * d + j];
    }
    total += cb.ema_count[ku];
    cb.usage_counts[ku] += static_cast<std::int64_t>(counts[ku]);
    cb.idle_steps[ku] = counts[ku] > 0 ? 0 : cb.idle_steps[ku] + 1;
  }
  const double eps = options_.laplace_eps;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int k = 0; k < k_total; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    double* code = cb.vectors.data().data() + ku * d;
    if (cb.idle_steps[ku] >= options_.dead_code_steps) {
      const double* src = inputs.data() + static_cast<std::size_t>(pick(rng_)) * d;
      std::copy_n(src, d, code);
      std::copy_n(src, d, cb.ema_sum.data().data() + ku * d);
      cb.ema_count[ku] = 1.0;
      cb.idle_steps[ku] = 0;
      continue;
    }
    const double smoothed = (cb.ema_count[ku] + eps) / (total + k_total * eps) * total;
    for (int j = 0; j < d; ++j) code[j] = cb.ema_sum[ku * d + j] / smoothed;
  }
}

Var ResidualVectorQuantizer::forward(Tape& tape, const Var& latent, bool train,
                                     Var* commit, RvqResult* result) {
  const Tensor& z = latent->value;
  if (codebooks_.empty()) throw std::invalid_argument("quantizer has no codebooks");
  if (z.rank() != 3 || z.channels() != codebooks_[0].dim()) {
    throw std::invalid_argument("latent dimension does not match the codebooks");
  }
  if (train && !initialized_) init_from_batch(z);

  const int d = z.channels();
  const int n = z.batch() * z.time();
  StagePass p = run_stages(codebooks_, to_rows(z), n, d, train);
  Tensor q = from_rows(p.quantized, z.shape());

  if (commit != nullptr) {
    const double scale = commitment_weight_ / static_cast<double>(z.size());
    double value = 0.0;
    Tensor grad = Tensor::zeros_like(z);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double diff = z[i] - q[i];
      value += diff * diff;
      grad[i] = 2.0 * scale * diff;
    }
    *commit = external_scalar(tape, scale * value, latent, std::move(grad));
  }
  if (train) {
    for (std::size_t s = 0; s < codebooks_.size(); ++s) {
      ema_update(static_cast<int>(s), p.stage_inputs[s], n, p.indices[s]);
    }
  }
  if (result != nullptr) {
    result->quantized = q;
    result->indices = p.indices;
    result->stage_error = p.stage_error;
  }
  return straight_through(tape, latent, std::move(q));
}

}  // namespace eggcodec::nn
