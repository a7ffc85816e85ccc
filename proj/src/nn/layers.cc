// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/nn/layers.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eggcodec::nn {
namespace {

Var uniform_weight(std::vector<int> shape, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return leaf(std::move(t));
}

}  // namespace

Conv1dLayer::Conv1dLayer(int in_channels, int out_channels, int kernel,
                         ConvSpec spec, std::mt19937_64& rng)
    : spec_(spec) {
  if (in_channels < 1 || out_channels < 1 || kernel < 1) {
    throw std::invalid_argument("Conv1dLayer: dimensions must be >= 1");
  }
  w_ = uniform_weight({out_channels, in_channels, kernel}, in_channels * kernel, rng);
  b_ = leaf(Tensor({out_channels}));
}

Var Conv1dLayer::forward(Tape& tape, const Var& x) const {
  return conv1d(tape, x, w_, b_, spec_);
}

void Conv1dLayer::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", w_});
  out.push_back({prefix + ".bias", b_});
}

ConvTranspose1dLayer::ConvTranspose1dLayer(int in_channels, int out_channels,
                                           int kernel, int stride, Padding padding,
                                           std::mt19937_64& rng)
    : stride_(stride), padding_(padding) {
  if (in_channels < 1 || out_channels < 1 || kernel < stride || stride < 1) {
    throw std::invalid_argument("ConvTranspose1dLayer: bad dimensions");
  }
  w_ = uniform_weight({in_channels, out_channels, kernel}, in_channels * kernel, rng);
  b_ = leaf(Tensor({out_channels}));
}

Var ConvTranspose1dLayer::forward(Tape& tape, const Var& x) const {
  return conv_transpose1d(tape, x, w_, b_, stride_, padding_);
}

void ConvTranspose1dLayer::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", w_});
  out.push_back({prefix + ".bias", b_});
}

ResidualUnit::ResidualUnit(int channels, int dilation, Padding padding,
                           std::mt19937_64& rng) {
  const int hidden = std::max(1, channels / 2);
  dilated_ = Conv1dLayer(channels, hidden, 3, {1, dilation, padding}, rng);
  pointwise_ = Conv1dLayer(hidden, channels, 1, {1, 1, padding}, rng);
}

Var ResidualUnit::forward(Tape& tape, const Var& x) const {
  Var h = dilated_.forward(tape, elu(tape, x));
  h = pointwise_.forward(tape, elu(tape, h));
  return add(tape, x, h);
}

void ResidualUnit::collect(const std::string& prefix, ParameterList& out) const {
  dilated_.collect(prefix + ".conv1", out);
  pointwise_.collect(prefix + ".conv2", out);
}

}  // namespace eggcodec::nn
