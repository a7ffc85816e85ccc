// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_LAYERS_H_
#define EGGCODEC_NN_LAYERS_H_

#include <random>
#include <string>
#include <vector>

#include "eggcodec/nn/autodiff.h"

namespace eggcodec::nn {

struct NamedParameter {
  std::string name;
  Var var;
};

using ParameterList = std::vector<NamedParameter>;

// Weights uniform in +-sqrt(1 / fan_in), bias zero.
class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(int in_channels, int out_channels, int kernel, ConvSpec spec,
              std::mt19937_64& rng);

  Var forward(Tape& tape, const Var& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  const Var& weight() const { return w_; }
  const Var& bias() const { return b_; }

 private:
  Var w_;
  Var b_;
  ConvSpec spec_;
};

class ConvTranspose1dLayer {
 public:
  ConvTranspose1dLayer() = default;
  ConvTranspose1dLayer(int in_channels, int out_channels, int kernel, int stride,
                       Padding padding, std::mt19937_64& rng);

  Var forward(Tape& tape, const Var& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Var w_;
  Var b_;
  int stride_ = 1;
  Padding padding_ = Padding::kSame;
};

// x + conv1(elu(conv_k(elu(x)))), bottleneck of half the channels.
class ResidualUnit {
 public:
  ResidualUnit() = default;
  ResidualUnit(int channels, int dilation, Padding padding, std::mt19937_64& rng);

  Var forward(Tape& tape, const Var& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Conv1dLayer dilated_;
  Conv1dLayer pointwise_;
};

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_LAYERS_H_
