// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/nn/autodiff.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace eggcodec::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

Var make_output(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->leaf = false;
  return n;
}

bool wants(const Var& v) { return v && v->requires_grad; }

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct ConvGeometry {
  int cin, cout, k, t_in, t_out, stride, dilation, pad_left;
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& w, const ConvSpec& s) {
  if (x.rank() != 3 || w.rank() != 3) {
    throw std::invalid_argument("conv1d expects rank-3 input and weight");
  }
  if (w.dim(1) != x.channels()) {
    throw std::invalid_argument("conv1d: input has " + std::to_string(x.channels()) +
                                " channels, weight expects " + std::to_string(w.dim(1)));
  }
  if (w.dim(2) < 1 || s.stride < 1 || s.dilation < 1) {
    throw std::invalid_argument("conv1d: kernel, stride and dilation must be >= 1");
  }
  ConvGeometry g{};
  g.cin = x.channels();
  g.cout = w.dim(0);
  g.k = w.dim(2);
  g.t_in = x.time();
  g.t_out = ceil_div(g.t_in, s.stride);
  g.stride = s.stride;
  g.dilation = s.dilation;
  const int total = (g.k - 1) * g.dilation;
  g.pad_left = s.padding == Padding::kCausal ? total : total / 2;
  return g;
}

void im2col(const double* x, const ConvGeometry& g, double* cols) {
  for (int ci = 0; ci < g.cin; ++ci) {
    const double* xc = x + static_cast<std::size_t>(ci) * g.t_in;
    for (int kk = 0; kk < g.k; ++kk) {
      double* row = cols + (static_cast<std::size_t>(ci) * g.k + kk) * g.t_out;
      const int offset = kk * g.dilation - g.pad_left;
      for (int t = 0; t < g.t_out; ++t) {
        const int src = t * g.stride + offset;
        row[t] = (src >= 0 && src < g.t_in) ? xc[src] : 0.0;
      }
    }
  }
}

void col2im(const double* cols, const ConvGeometry& g, double* x) {
  for (int ci = 0; ci < g.cin; ++ci) {
    double* xc = x + static_cast<std::size_t>(ci) * g.t_in;
    for (int kk = 0; kk < g.k; ++kk) {
      const double* row = cols + (static_cast<std::size_t>(ci) * g.k + kk) * g.t_out;
      const int offset = kk * g.dilation - g.pad_left;
      for (int t = 0; t < g.t_out; ++t) {
        const int src = t * g.stride + offset;
        if (src >= 0 && src < g.t_in) xc[src] += row[t];
      }
    }
  }
}

void check_bias(const Var& bias, int cout) {
  if (bias && (bias->value.rank() != 1 || bias->value.dim(0) != cout)) {
    throw std::invalid_argument("bias must have one entry per output channel");
  }
}

}  // namespace

void Node::accumulate(std::span<const double> g) {
  Tensor& buf = grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

Tensor& Node::grad_buffer() {
  if (grad.size() != value.size()) grad = Tensor::zeros_like(value);
  return grad;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

bool Tape::needs_grad(std::initializer_list<Var> inputs) const {
  return record_grad_ && std::any_of(inputs.begin(), inputs.end(), wants);
}

void Tape::record(std::initializer_list<Var> inputs, std::function<void()> backward) {
  if (consumed_) throw std::logic_error("tape already consumed by backward()");
  for (const Var& v : inputs) {
    if (wants(v) && v->leaf &&
        std::find(leaves_.begin(), leaves_.end(), v) == leaves_.end()) {
      leaves_.push_back(v);
    }
  }
  ops_.push_back(std::move(backward));
}

void Tape::backward(const Var& loss) {
  if (consumed_) {
    throw std::logic_error("backward() called twice without a new forward pass");
  }
  if (ops_.empty()) throw std::logic_error("backward() without a recorded forward pass");
  if (!loss || loss->value.size() != 1) {
    throw std::invalid_argument("backward() needs a scalar loss");
  }
  consumed_ = true;
  for (const Var& v : leaves_) v->grad_buffer().fill(0.0);
  loss->grad_buffer()[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  ops_.clear();
}

Var conv1d(Tape& tape, const Var& x, const Var& w, const Var& bias,
           const ConvSpec& spec) {
  const ConvGeometry g = conv_geometry(x->value, w->value, spec);
  check_bias(bias, g.cout);
  const int batch = x->value.batch();
  const int rows = g.cin * g.k;

  Tensor y({batch, g.cout, g.t_out});
  RowMat cols(rows, g.t_out);
  const ConstMatMap wm(w->value.data().data(), g.cout, rows);
  for (int b = 0; b < batch; ++b) {
    im2col(x->value.item(b), g, cols.data());
    MatMap ym(y.item(b), g.cout, g.t_out);
    ym.noalias() = wm * cols;
    if (bias) {
      for (int co = 0; co < g.cout; ++co) ym.row(co).array() += bias->value[static_cast<std::size_t>(co)];
    }
  }

  Var out = make_output(std::move(y), tape.needs_grad({x, w, bias}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({x, w, bias}, [x, w, bias, o, g, batch, rows] {
    if (o->grad.empty()) return;
    RowMat cols(rows, g.t_out);
    RowMat gcols;
    const ConstMatMap wm(w->value.data().data(), g.cout, rows);
    for (int b = 0; b < batch; ++b) {
      const ConstMatMap gy(o->grad.item(b), g.cout, g.t_out);
      if (wants(w)) {
        im2col(x->value.item(b), g, cols.data());
        MatMap gw(w->grad_buffer().data().data(), g.cout, rows);
        gw.noalias() += gy * cols.transpose();
      }
      if (wants(bias)) {
        Tensor& gb = bias->grad_buffer();
        for (int co = 0; co < g.cout; ++co) gb[static_cast<std::size_t>(co)] += gy.row(co).sum();
      }
      if (wants(x)) {
        gcols.noalias() = wm.transpose() * gy;
        col2im(gcols.data(), g, x->grad_buffer().item(b));
      }
    }
  });
  return out;
}

Var conv_transpose1d(Tape& tape, const Var& x, const Var& w, const Var& bias,
                     int stride, Padding padding) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  if (xv.rank() != 3 || wv.rank() != 3 || wv.dim(0) != xv.channels()) {
    throw std::invalid_argument("conv_transpose1d: channel mismatch");
  }
  if (stride < 1 || wv.dim(2) < stride) {
    throw std::invalid_argument("conv_transpose1d: need 1 <= stride <= kernel");
  }
  const int cin = xv.channels();
  const int cout = wv.dim(1);
  const int k = wv.dim(2);
  const int t_in = xv.time();
  const int t_out = t_in * stride;
  const int trim = padding == Padding::kSame ? (k - stride) / 2 : 0;
  const int batch = xv.batch();
  check_bias(bias, cout);

  Tensor y({batch, cout, t_out});
  const ConstMatMap wm(wv.data().data(), cin, cout * k);
  RowMat cols(cout * k, t_in);
  for (int b = 0; b < batch; ++b) {
    const ConstMatMap xm(xv.item(b), cin, t_in);
    cols.noalias() = wm.transpose() * xm;
    double* yb = y.item(b);
    for (int co = 0; co < cout; ++co) {
      double* yc = yb + static_cast<std::size_t>(co) * t_out;
      for (int kk = 0; kk < k; ++kk) {
        const double* row = cols.data() + (static_cast<std::size_t>(co) * k + kk) * t_in;
        for (int t = 0; t < t_in; ++t) {
          const int dst = t * stride + kk - trim;
          if (dst >= 0 && dst < t_out) yc[dst] += row[t];
        }
      }
      if (bias) {
        const double bv = bias->value[static_cast<std::size_t>(co)];
        for (int t = 0; t < t_out; ++t) yc[t] += bv;
      }
    }
  }

  Var out = make_output(std::move(y), tape.needs_grad({x, w, bias}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({x, w, bias}, [x, w, bias, o, cin, cout, k, t_in, t_out, stride,
                             trim, batch] {
    if (o->grad.empty()) return;
    RowMat gcols(cout * k, t_in);
    const ConstMatMap wm(w->value.data().data(), cin, cout * k);
    for (int b = 0; b < batch; ++b) {
      const double* gy = o->grad.item(b);
      for (int co = 0; co < cout; ++co) {
        const double* gyc = gy + static_cast<std::size_t>(co) * t_out;
        for (int kk = 0; kk < k; ++kk) {
          double* row = gcols.data() + (static_cast<std::size_t>(co) * k + kk) * t_in;
          for (int t = 0; t < t_in; ++t) {
            const int dst = t * stride + kk - trim;
            row[t] = (dst >= 0 && dst < t_out) ? gyc[dst] : 0.0;
          }
        }
        if (wants(bias)) {
          double s = 0.0;
          for (int t = 0; t < t_out; ++t) s += gyc[t];
          bias->grad_buffer()[static_cast<std::size_t>(co)] += s;
        }
      }
      if (wants(w)) {
        const ConstMatMap xm(x->value.item(b), cin, t_in);
        MatMap gw(w->grad_buffer().data().data(), cin, cout * k);
        gw.noalias() += xm * gcols.transpose();
      }
      if (wants(x)) {
        MatMap gx(x->grad_buffer().item(b), cin, t_in);
        gx.noalias() += wm * gcols;
      }
    }
  });
  return out;
}

Var elu(Tape& tape, const Var& x) {
  Tensor y = x->value;
  for (double& v : y.data()) v = v > 0.0 ? v : std::expm1(v);
  Var out = make_output(std::move(y), tape.needs_grad({x}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({x}, [x, o] {
    if (o->grad.empty()) return;
    Tensor& gx = x->grad_buffer();
    const auto& xv = x->value.data();
    const auto& yv = o->value.data();
    const auto& gy = o->grad.data();
    for (std::size_t i = 0; i < gy.size(); ++i) {
      gx[i] += gy[i] * (xv[i] > 0.0 ? 1.0 : yv[i] + 1.0);
    }
  });
  return out;
}

Var tanh(Tape& tape, const Var& x) {
  Tensor y = x->value;
  for (double& v : y.data()) v = std::tanh(v);
  Var out = make_output(std::move(y), tape.needs_grad({x}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({x}, [x, o] {
    if (o->grad.empty()) return;
    Tensor& gx = x->grad_buffer();
    const auto& yv = o->value.data();
    const auto& gy = o->grad.data();
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * (1.0 - yv[i] * yv[i]);
  });
  return out;
}

Var add(Tape& tape, const Var& a, const Var& b) {
  if (a->value.shape() != b->value.shape()) {
    throw std::invalid_argument("add: shape mismatch");
  }
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b->value[i];
  Var out = make_output(std::move(y), tape.needs_grad({a, b}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({a, b}, [a, b, o] {
    if (o->grad.empty()) return;
    if (wants(a)) a->accumulate(o->grad.data());
    if (wants(b)) b->accumulate(o->grad.data());
  });
  return out;
}

Var straight_through(Tape& tape, const Var& latent, Tensor quantized) {
  if (quantized.shape() != latent->value.shape()) {
    throw std::invalid_argument("straight_through: shape mismatch");
  }
  Var out = make_output(std::move(quantized), tape.needs_grad({latent}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({latent}, [latent, o] {
    if (!o->grad.empty()) latent->accumulate(o->grad.data());
  });
  return out;
}

Var external_scalar(Tape& tape, double value, const Var& input, Tensor grad) {
  if (grad.size() != input->value.size()) {
    throw std::invalid_argument("external_scalar: gradient shape mismatch");
  }
  Var out = make_output(Tensor({1}, value), tape.needs_grad({input}));
  if (!out->requires_grad) return out;
  Node* o = out.get();
  tape.record({input}, [input, o, g = std::move(grad)] {
    if (o->grad.empty()) return;
    const double up = o->grad[0];
    Tensor& gi = input->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += up * g[i];
  });
  return out;
}

Var sum(Tape& tape, const std::vector<Var>& scalars) {
  double total = 0.0;
  bool any = false;
  for (const Var& s : scalars) {
    if (s->value.size() != 1) throw std::invalid_argument("sum: expects scalars");
    total += s->value[0];
    any |= wants(s);
  }
  any = any && tape.recording();
  Var out = make_output(Tensor({1}, total), any);
  if (!any) return out;
  Node* o = out.get();
  std::vector<Var> inputs = scalars;
  tape.record({}, [inputs, o] {
    if (o->grad.empty()) return;
    for (const Var& s : inputs) {
      if (wants(s)) s->grad_buffer()[0] += o->grad[0];
    }
  });
  return out;
}

}  // namespace eggcodec::nn
