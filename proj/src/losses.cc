// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eggcodec/errors.h"
#include "eggcodec/spectral.h"

namespace eggcodec {
namespace {

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("loss: pred and ref lengths differ");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// mean |pred - ref| and mean (pred - ref)^2 with their gradients.
struct TimeNorms {
  LossValue l1;
  LossValue l2;
};

TimeNorms time_norms(std::span<const double> pred, std::span<const double> ref,
                     bool with_grad) {
  check_same_length(pred.size(), ref.size());
  if (pred.empty()) throw std::invalid_argument("loss: empty signals");
  const auto n = static_cast<double>(pred.size());
  TimeNorms out;
  if (with_grad) {
    out.l1.grad.resize(pred.size());
    out.l2.grad.resize(pred.size());
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - ref[i];
    out.l1.value += std::abs(d);
    out.l2.value += d * d;
    if (with_grad) {
      out.l1.grad[i] = sign(d) / n;
      out.l2.grad[i] = 2.0 * d / n;
    }
  }
  out.l1.value /= n;
  out.l2.value /= n;
  return out;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (cfg.spectral_scales.empty()) {
    throw std::invalid_argument("spectral_scales must not be empty");
  }
  for (int w : cfg.spectral_scales) {
    if (w < 32 || w > 1024 || (w & (w - 1)) != 0) {
      throw std::invalid_argument("spectral scale must be a power of two in [32, 1024]");
    }
  }
}

void to_json(nlohmann::json& j, const LossReport& r) {
  j = nlohmann::json{{"l_s", r.l_s},   {"l_cos", r.l_cos}, {"l_l1", r.l_l1},
                     {"l_l2", r.l_l2}, {"l_t", r.l_t},     {"l_reco", r.l_reco},
                     {"l_g", r.l_g},   {"l_d", r.l_d},     {"l_l", r.l_l}};
}

void from_json(const nlohmann::json& j, LossReport& r) {
  j.at("l_s").get_to(r.l_s);
  j.at("l_cos").get_to(r.l_cos);
  j.at("l_l1").get_to(r.l_l1);
  j.at("l_l2").get_to(r.l_l2);
  j.at("l_t").get_to(r.l_t);
  j.at("l_reco").get_to(r.l_reco);
  j.at("l_g").get_to(r.l_g);
  j.at("l_d").get_to(r.l_d);
  j.at("l_l").get_to(r.l_l);
}

LossValue spectral_loss(const SignalBuffer& pred, const SignalBuffer& ref,
                        const LossConfig& cfg, bool with_grad) {
  validate(cfg);
  check_same_length(pred.size(), ref.size());
  if (pred.sample_rate_hz != ref.sample_rate_hz) {
    throw std::invalid_argument("spectral_loss: sample rates differ");
  }
  const int largest = *std::max_element(cfg.spectral_scales.begin(),
                                        cfg.spectral_scales.end());
  if (pred.size() < static_cast<std::size_t>(largest)) {
    throw std::invalid_argument("spectral_loss: signal shorter than the largest window");
  }

  LossValue out;
  if (with_grad) out.grad.assign(pred.size(), 0.0);
  const double per_scale = 1.0 / static_cast<double>(cfg.spectral_scales.size());
  for (int w : cfg.spectral_scales) {
    const Matrix diff = log_mel(pred, w).values - log_mel(ref, w).values;
    const auto n = static_cast<double>(diff.size());
    const double l1 = diff.cwiseAbs().sum() / n;
    const double l2 = std::sqrt(diff.squaredNorm() / n);
    out.value += per_scale * (l1 + l2);
    if (!with_grad || l2 == 0.0) continue;
    const Matrix upstream =
        diff.unaryExpr([](double d) { return sign(d); }) / n + diff / (n * l2);
    axpy(per_scale, log_mel_backward(pred, w, upstream), out.grad);
  }
  return out;
}

LossValue cosine_distance(std::span<const double> y1, std::span<const double> y2,
                          bool with_grad) {
  check_same_length(y1.size(), y2.size());
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    dot += y1[i] * y2[i];
    n1 += y1[i] * y1[i];
    n2 += y2[i] * y2[i];
  }
  if (n1 == 0.0 || n2 == 0.0) {
    throw DegenerateInputError("cosine distance of a zero-norm vector");
  }
  const double a = std::sqrt(n1);
  const double b = std::sqrt(n2);
  const double cos = dot / (a * b);
  LossValue out;
  out.value = std::clamp(1.0 - cos, 0.0, 2.0);
  if (with_grad) {
    out.grad.resize(y1.size());
    for (std::size_t i = 0; i < y1.size(); ++i) {
      out.grad[i] = -(y2[i] / (a * b) - cos * y1[i] / n1);
    }
  }
  return out;
}

LossValue time_loss(std::span<const double> pred, std::span<const double> ref,
                    const LossConfig& cfg, bool with_grad) {
  validate(cfg);
  const TimeNorms norms = time_norms(pred, ref, with_grad);
  const LossValue cos = cosine_distance(pred, ref, with_grad);
  LossValue out;
  out.value = (norms.l1.value + norms.l2.value) / cfg.lambda + cos.value;
  if (with_grad) {
    out.grad = cos.grad;
    axpy(1.0 / cfg.lambda, norms.l1.grad, out.grad);
    axpy(1.0 / cfg.lambda, norms.l2.grad, out.grad);
  }
  return out;
}

ReconstructionLoss reconstruction_loss(const SignalBuffer& pred,
                                       const SignalBuffer& ref,
                                       const LossConfig& cfg, bool with_grad) {
  validate(cfg);
  if (!cfg.include_spectral && !cfg.include_time_l1l2 && !cfg.include_time_cos) {
    throw std::invalid_argument("reconstruction_loss: every term is disabled");
  }
  check_same_length(pred.size(), ref.size());

  ReconstructionLoss out;
  LossReport& r = out.report;
  if (with_grad) out.grad.assign(pred.size(), 0.0);

  if (cfg.include_spectral) {
    const LossValue s = spectral_loss(pred, ref, cfg, with_grad);
    r.l_s = s.value;
    if (with_grad) axpy(1.0, s.grad, out.grad);
  }
  if (cfg.include_time_l1l2) {
    const TimeNorms norms = time_norms(pred.samples, ref.samples, with_grad);
    r.l_l1 = norms.l1.value;
    r.l_l2 = norms.l2.value;
    // lambda * (l1 + l2) / lambda
    if (with_grad) {
      axpy(1.0, norms.l1.grad, out.grad);
      axpy(1.0, norms.l2.grad, out.grad);
    }
  }
  if (cfg.include_time_cos) {
    const LossValue c = cosine_distance(pred.samples, ref.samples, with_grad);
    r.l_cos = c.value;
    if (with_grad) axpy(cfg.lambda, c.grad, out.grad);
  }
  r.l_t = (r.l_l1 + r.l_l2) / cfg.lambda + r.l_cos;
  r.l_reco = r.l_s + cfg.lambda * r.l_t + r.l_g + r.l_d + r.l_l;
  return out;
}

}  // namespace eggcodec
