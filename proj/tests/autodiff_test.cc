// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <ostream>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "eggcodec/nn/autodiff.h"
#include "eggcodec/nn/layers.h"
#include "test_util.h"

namespace eggcodec::nn {
namespace {

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> d;
  for (double& v : t.data()) v = d(rng);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

int left_pad(int k, int dilation, Padding p) {
  const int total = (k - 1) * dilation;
  return p == Padding::kCausal ? total : total / 2;
}

// Nested-loop cross-correlation.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, const ConvSpec& s) {
  const int B = x.batch(), cin = x.channels(), T = x.time();
  const int cout = w.dim(0), K = w.dim(2);
  const int tout = (T + s.stride - 1) / s.stride;
  const int pl = left_pad(K, s.dilation, s.padding);
  Tensor y({B, cout, tout});
  for (int n = 0; n < B; ++n)
    for (int o = 0; o < cout; ++o)
      for (int t = 0; t < tout; ++t) {
        double acc = b.empty() ? 0.0 : b[static_cast<std::size_t>(o)];
        for (int i = 0; i < cin; ++i)
          for (int k = 0; k < K; ++k) {
            const int src = t * s.stride + k * s.dilation - pl;
            if (src >= 0 && src < T) acc += w.at(o, i, k) * x.at(n, i, src);
          }
        y.at(n, o, t) = acc;
      }
  return y;
}

// Gradients of sum(g .* conv(x, w, b)) by the same nested loops.
std::tuple<Tensor, Tensor, Tensor> conv_backward_oracle(const Tensor& x, const Tensor& w,
                                                        const Tensor& g, const ConvSpec& s) {
  const int B = x.batch(), cin = x.channels(), T = x.time();
  const int cout = w.dim(0), K = w.dim(2), tout = g.time();
  const int pl = left_pad(K, s.dilation, s.padding);
  Tensor gx(x.shape()), gw(w.shape()), gb({cout});
  for (int n = 0; n < B; ++n)
    for (int o = 0; o < cout; ++o)
      for (int t = 0; t < tout; ++t) {
        const double up = g.at(n, o, t);
        gb[static_cast<std::size_t>(o)] += up;
        for (int i = 0; i < cin; ++i)
          for (int k = 0; k < K; ++k) {
            const int src = t * s.stride + k * s.dilation - pl;
            if (src < 0 || src >= T) continue;
            gw.at(o, i, k) += up * x.at(n, i, src);
            gx.at(n, i, src) += up * w.at(o, i, k);
          }
      }
  return {gx, gw, gb};
}

// Scatter form of the transposed convolution.
Tensor conv_transpose_oracle(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                             Padding p) {
  const int B = x.batch(), cin = x.channels(), T = x.time();
  const int cout = w.dim(1), K = w.dim(2), tout = T * stride;
  const int trim = p == Padding::kSame ? (K - stride) / 2 : 0;
  Tensor y({B, cout, tout});
  for (int n = 0; n < B; ++n)
    for (int o = 0; o < cout; ++o)
      for (int t = 0; t < tout; ++t) y.at(n, o, t) = b.empty() ? 0.0 : b[static_cast<std::size_t>(o)];
  for (int n = 0; n < B; ++n)
    for (int i = 0; i < cin; ++i)
      for (int t = 0; t < T; ++t)
        for (int o = 0; o < cout; ++o)
          for (int k = 0; k < K; ++k) {
            const int dst = t * stride + k - trim;
            if (dst >= 0 && dst < tout) y.at(n, o, dst) += x.at(n, i, t) * w.at(i, o, k);
          }
  return y;
}

struct ConvCase {
  int cin, cout, k, t, stride, dilation;
  Padding padding;
};

void PrintTo(const ConvCase& c, std::ostream* os) {
  *os << c.cin << "x" << c.cout << "_k" << c.k << "_t" << c.t << "_s" << c.stride << "_d"
      << c.dilation << (c.padding == Padding::kSame ? "_same" : "_causal");
}

class ConvOracleTest : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracleTest, ForwardAndBackwardMatchNestedLoops) {
  const ConvCase c = GetParam();
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.k * 100 + c.t + c.stride * 7 + c.dilation));
  const ConvSpec spec{c.stride, c.dilation, c.padding};
  Var x = leaf(random_tensor({2, c.cin, c.t}, rng));
  Var w = leaf(random_tensor({c.cout, c.cin, c.k}, rng));
  Var b = leaf(random_tensor({c.cout}, rng));
  Tape tape;
  Var y = conv1d(tape, x, w, b, spec);
  EXPECT_LE(max_abs_diff(y->value, conv_oracle(x->value, w->value, b->value, spec)), 1e-12);

  const Tensor g = random_tensor(y->value.shape(), rng);
  double dot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y->value[i];
  tape.backward(external_scalar(tape, dot, y, g));
  const auto [gx, gw, gb] = conv_backward_oracle(x->value, w->value, g, spec);
  EXPECT_LE(max_abs_diff(x->grad, gx), 1e-11);
  EXPECT_LE(max_abs_diff(w->grad, gw), 1e-11);
  EXPECT_LE(max_abs_diff(b->grad, gb), 1e-11);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvOracleTest,
    ::testing::Values(ConvCase{1, 1, 1, 9, 1, 1, Padding::kSame},
                      ConvCase{3, 4, 3, 17, 1, 1, Padding::kSame},
                      ConvCase{3, 4, 3, 17, 1, 1, Padding::kCausal},
                      ConvCase{2, 5, 3, 20, 1, 4, Padding::kSame},
                      ConvCase{2, 3, 7, 31, 1, 1, Padding::kSame},
                      ConvCase{4, 2, 4, 16, 2, 1, Padding::kSame},
                      ConvCase{4, 2, 8, 33, 4, 1, Padding::kSame},
                      ConvCase{2, 2, 4, 15, 2, 1, Padding::kCausal},
                      ConvCase{2, 3, 2, 8, 1, 2, Padding::kCausal}));

TEST(ConvTest, IdentityKernelAndBiasBroadcast) {
  std::mt19937_64 rng(1);
  Var x = leaf(random_tensor({1, 1, 12}, rng), false);
  Tape tape(false);
  Var y = conv1d(tape, x, constant(Tensor({1, 1, 1}, 1.0)), constant(Tensor({1}, 0.0)), {});
  EXPECT_EQ(y->value, x->value);

  Var zero = constant(Tensor({1, 2, 10}));
  Var z = conv1d(tape, zero, constant(random_tensor({3, 2, 3}, rng)),
                 constant(Tensor({3}, std::vector<double>{0.5, -1.0, 2.0})), {});
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(z->value.at(0, 0, t), 0.5);
    EXPECT_EQ(z->value.at(0, 1, t), -1.0);
    EXPECT_EQ(z->value.at(0, 2, t), 2.0);
  }
  EXPECT_EQ(tape.size(), 0u);
}

TEST(ConvTest, RejectsChannelMismatch) {
  Tape tape;
  EXPECT_THROW(conv1d(tape, constant(Tensor({1, 2, 8})), constant(Tensor({1, 3, 3})),
                      constant(Tensor({1})), {}),
               std::invalid_argument);
}

TEST(ConvTest, ZeroUpstreamGivesZeroGrads) {
  std::mt19937_64 rng(2);
  Var x = leaf(random_tensor({1, 2, 10}, rng));
  Var w = leaf(random_tensor({3, 2, 3}, rng));
  Var b = leaf(random_tensor({3}, rng));
  Tape tape;
  Var y = conv1d(tape, x, w, b, {});
  tape.backward(external_scalar(tape, 0.0, y, Tensor(y->value.shape())));
  for (const Var& v : {x, w, b}) {
    for (double g : v->grad.data()) EXPECT_EQ(g, 0.0);
  }
}

TEST(ConvTransposeTest, ForwardMatchesScatterOracle) {
  std::mt19937_64 rng(3);
  for (auto [k, stride, pad] : {std::tuple{4, 2, Padding::kSame}, std::tuple{8, 4, Padding::kSame},
                                std::tuple{4, 2, Padding::kCausal}, std::tuple{3, 1, Padding::kSame},
                                std::tuple{5, 2, Padding::kSame}}) {
    Var x = leaf(random_tensor({2, 3, 9}, rng));
    Var w = leaf(random_tensor({3, 2, k}, rng));
    Var b = leaf(random_tensor({2}, rng));
    Tape tape;
    Var y = conv_transpose1d(tape, x, w, b, stride, pad);
    EXPECT_EQ(y->value.time(), 9 * stride);
    EXPECT_LE(max_abs_diff(y->value, conv_transpose_oracle(x->value, w->value, b->value, stride, pad)),
              1e-12);

    // Adjoint identity: <g, T(x)> - <g, T(0)> = <conv^T g, x>; check via the tape
    // by comparing to a finite difference along a random direction.
    const Tensor g = random_tensor(y->value.shape(), rng);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y->value[i];
    tape.backward(external_scalar(tape, dot, y, g));
    const Tensor dir = random_tensor(x->value.shape(), rng);
    Tensor xp = x->value, xm = x->value;
    for (std::size_t i = 0; i < xp.size(); ++i) {
      xp[i] += 1e-5 * dir[i];
      xm[i] -= 1e-5 * dir[i];
    }
    const Tensor yp = conv_transpose_oracle(xp, w->value, b->value, stride, pad);
    const Tensor ym = conv_transpose_oracle(xm, w->value, b->value, stride, pad);
    double fd = 0.0, an = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) fd += g[i] * (yp[i] - ym[i]) / 2e-5;
    for (std::size_t i = 0; i < dir.size(); ++i) an += x->grad[i] * dir[i];
    EXPECT_NEAR(an, fd, 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST(ActivationTest, EluValues) {
  Tape tape(false);
  Var x = constant(Tensor({1, 1, 4}, std::vector<double>{0.0, -20.0, 2.0, -1.0}));
  Var y = elu(tape, x);
  EXPECT_EQ(y->value[0], 0.0);
  EXPECT_NEAR(y->value[1], -1.0, 1e-8);
  EXPECT_EQ(y->value[2], 2.0);
  EXPECT_NEAR(y->value[3], std::exp(-1.0) - 1.0, 1e-15);
}

TEST(ActivationTest, EluAndTanhGradients) {
  std::mt19937_64 rng(4);
  for (int which = 0; which < 2; ++which) {
    Var x = leaf(random_tensor({1, 2, 16}, rng));
    Tape tape;
    Var y = which == 0 ? elu(tape, x) : nn::tanh(tape, x);
    Tensor ones(y->value.shape(), 1.0);
    double s = 0.0;
    for (double v : y->value.data()) s += v;
    tape.backward(external_scalar(tape, s, y, ones));
    for (std::size_t i = 0; i < x->value.size(); ++i) {
      const double v = x->value[i];
      const double expected = which == 0 ? (v > 0 ? 1.0 : std::exp(v))
                                         : 1.0 - std::tanh(v) * std::tanh(v);
      EXPECT_NEAR(x->grad[i], expected, 1e-14);
    }
  }
}

TEST(TapeTest, SecondBackwardIsAnError) {
  Var x = leaf(Tensor({1, 1, 3}, 1.0));
  Tape tape;
  Var y = elu(tape, x);
  Var loss = external_scalar(tape, 3.0, y, Tensor({1, 1, 3}, 1.0));
  tape.backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(loss), std::logic_error);
}

TEST(TapeTest, EmptyTapeAndNonScalarLoss) {
  Tape empty;
  EXPECT_THROW(empty.backward(constant(Tensor({1}, 0.0))), std::logic_error);
  Var x = leaf(Tensor({1, 1, 3}, 1.0));
  Tape tape;
  Var y = elu(tape, x);
  EXPECT_THROW(tape.backward(y), std::invalid_argument);
}

TEST(TapeTest, UnusedParameterGetsZeroGradient) {
  std::mt19937_64 rng(5);
  Var used = leaf(random_tensor({1, 1, 4}, rng));
  Var unused = leaf(random_tensor({1, 1, 4}, rng));
  unused->accumulate(std::vector<double>(4, 7.0));
  Tape tape;
  Var y = elu(tape, used);
  Var z = elu(tape, unused);
  (void)z;
  tape.backward(external_scalar(tape, 0.0, y, Tensor({1, 1, 4}, 1.0)));
  for (double g : unused->grad.data()) EXPECT_EQ(g, 0.0);
  for (double g : used->grad.data()) EXPECT_NE(g, 0.0);
}

TEST(TapeTest, GradientsAccumulateOverSharedUse) {
  Var x = leaf(Tensor({1, 1, 2}, std::vector<double>{1.0, 2.0}));
  Tape tape;
  Var y = add(tape, x, x);
  tape.backward(external_scalar(tape, 6.0, y, Tensor({1, 1, 2}, 1.0)));
  EXPECT_EQ(x->grad[0], 2.0);
  EXPECT_EQ(x->grad[1], 2.0);
}

TEST(TapeTest, StraightThroughAndSum) {
  Var z = leaf(Tensor({1, 1, 3}, std::vector<double>{0.1, 0.2, 0.3}));
  Tape tape;
  Var q = straight_through(tape, z, Tensor({1, 1, 3}, std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_EQ(q->value[0], 1.0);
  Var a = external_scalar(tape, 3.0, q, Tensor({1, 1, 3}, std::vector<double>{1.0, 2.0, 3.0}));
  Var b = external_scalar(tape, 1.0, z, Tensor({1, 1, 3}, 1.0));
  Var total = sum(tape, {a, b});
  EXPECT_EQ(total->value[0], 4.0);
  tape.backward(total);
  EXPECT_EQ(z->grad[0], 2.0);
  EXPECT_EQ(z->grad[1], 3.0);
  EXPECT_EQ(z->grad[2], 4.0);
}

TEST(LayersTest, ResidualUnitIsIdentityPlusBranch) {
  std::mt19937_64 rng(6);
  ResidualUnit unit(4, 2, Padding::kSame, rng);
  ParameterList params;
  unit.collect("r", params);
  ASSERT_EQ(params.size(), 4u);
  EXPECT_EQ(params[0].name, "r.conv1.weight");
  EXPECT_EQ(params[0].var->value.shape(), (std::vector<int>{2, 4, 3}));
  EXPECT_EQ(params[2].var->value.shape(), (std::vector<int>{4, 2, 1}));
  // Zeroing the pointwise conv leaves the skip path only.
  params[2].var->value.fill(0.0);
  params[3].var->value.fill(0.0);
  Var x = constant(random_tensor({1, 4, 10}, rng));
  Tape tape(false);
  EXPECT_EQ(unit.forward(tape, x)->value, x->value);
}

TEST(LayersTest, InitialisationBounds) {
  std::mt19937_64 rng(7);
  Conv1dLayer conv(8, 4, 3, {}, rng);
  const double bound = std::sqrt(1.0 / 24.0);
  for (double v : conv.weight()->value.data()) EXPECT_LE(std::abs(v), bound);
  for (double v : conv.bias()->value.data()) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace eggcodec::nn
