// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_AUTODIFF_H_
#define EGGCODEC_NN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "eggcodec/nn/tensor.h"

namespace eggcodec::nn {

// A value in the computation graph. Leaves with requires_grad are parameters
// or inputs being differentiated; interior nodes are produced by ops.
struct Node {
  Tensor value;
  Tensor grad;  // empty until gradient flows in
  bool requires_grad = false;
  bool leaf = true;

  // Adds g into grad, allocating zeros on first use.
  void accumulate(std::span<const double> g);
  Tensor& grad_buffer();
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);
Var leaf(Tensor value, bool requires_grad = true);

// Records the backward closure of every op in execution order and replays
// them in reverse. A tape is good for exactly one backward pass.
class Tape {
 public:
  // A tape built with record_grad = false records nothing; ops then return
  // plain values (inference mode).
  explicit Tape(bool record_grad = true) : record_grad_(record_grad) {}

  // Registers the closure that propagates `out->grad` into the op's inputs.
  // `inputs` are scanned for differentiable leaves.
  void record(std::initializer_list<Var> inputs, std::function<void()> backward);

  bool needs_grad(std::initializer_list<Var> inputs) const;

  // Seeds d loss / d loss = 1 and runs the recorded closures in reverse.
  // Every differentiable leaf reached by the forward pass has its gradient
  // reset first, so it holds exactly this pass's gradient afterwards.
  // Throws std::logic_error when nothing was recorded or the tape was
  // already consumed, and std::invalid_argument for a non-scalar loss.
  void backward(const Var& loss);

  bool consumed() const { return consumed_; }
  bool recording() const { return record_grad_; }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
  std::vector<Var> leaves_;
  bool consumed_ = false;
  bool record_grad_ = true;
};

enum class Padding {
  kCausal,  // all (K-1)*dilation zeros on the left
  kSame,    // split evenly, extra zero on the right
};

struct ConvSpec {
  int stride = 1;
  int dilation = 1;
  Padding padding = Padding::kSame;
};

// Cross-correlation of x (B, Cin, T) with w (Cout, Cin, K) plus optional
// bias (Cout); output (B, Cout, ceil(T / stride)). Input positions outside
// [0, T) read as zero.
Var conv1d(Tape& tape, const Var& x, const Var& w, const Var& bias,
           const ConvSpec& spec);

// Transposed convolution of x (B, Cin, T) with w (Cin, Cout, K); output
// (B, Cout, T * stride). The full (T-1)*stride + K result is trimmed by
// (K - stride) / 2 on the left (kSame) or only on the right (kCausal).
Var conv_transpose1d(Tape& tape, const Var& x, const Var& w, const Var& bias,
                     int stride, Padding padding = Padding::kSame);

Var elu(Tape& tape, const Var& x);
Var tanh(Tape& tape, const Var& x);
Var add(Tape& tape, const Var& a, const Var& b);

// Forward value `quantized`, backward passes the gradient to `latent`
// unchanged.
Var straight_through(Tape& tape, const Var& latent, Tensor quantized);

// A scalar computed outside the graph whose gradient with respect to
// `input` is already known.
Var external_scalar(Tape& tape, double value, const Var& input, Tensor grad);

Var sum(Tape& tape, const std::vector<Var>& scalars);

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_AUTODIFF_H_
