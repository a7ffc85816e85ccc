// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/gradcheck.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "eggcodec/losses.h"
#include "eggcodec/nn/autodiff.h"
#include "eggcodec/nn/layers.h"
#include "eggcodec/nn/model.h"
#include "eggcodec/nn/quantizer.h"
#include "eggcodec/spectral.h"

namespace eggcodec {
namespace {

using nn::Tape;
using nn::Tensor;
using nn::Var;

constexpr double kLayerTol = 1e-4;
constexpr double kModelTol = 1e-3;

// One array differentiated by a check: its values (perturbed in place) and
// the analytic gradient at the unperturbed point.
struct Probe {
  std::span<double> x;
  std::vector<double> analytic;
};

std::vector<double> gaussian(std::size_t n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Tensor gaussian_tensor(std::vector<int> shape, double scale, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const std::vector<double> v = gaussian(t.size(), scale, rng);
  t.data().assign(v.begin(), v.end());
  return t;
}

double compare(const std::function<double()>& f, std::vector<Probe>& probes,
               const GradCheckOptions& opts, std::size_t* coords) {
  std::mt19937_64 rng(opts.seed ^ 0xC0FFEEull);
  double worst = 0.0;
  *coords = 0;
  for (Probe& p : probes) {
    std::vector<std::size_t> idx(p.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > static_cast<std::size_t>(opts.max_coords)) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(opts.max_coords));
    }
    std::vector<double> numeric(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double& x = p.x[idx[k]];
      const double saved = x;
      x = saved + opts.step;
      const double up = f();
      x = saved - opts.step;
      const double down = f();
      x = saved;
      numeric[k] = (up - down) / (2.0 * opts.step);
    }
    double scale = 0.0;
    for (double v : numeric) scale = std::max(scale, std::abs(v));
    scale *= 1e-3;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double a = p.analytic[idx[k]] * (1.0 + opts.perturb);
      const double n = numeric[k];
      const double denom = std::max({std::abs(a), std::abs(n), scale});
      if (denom > 0.0) worst = std::max(worst, std::abs(a - n) / denom);
    }
    *coords += idx.size();
  }
  return worst;
}

GradCheckResult finish(const std::string& name, GradScope scope, double tol,
                       double err, std::size_t coords) {
  return {name, scope, err, tol, coords, std::isfinite(err) && err <= tol};
}

// Checks d/d(leaves) of sum(r .* build(tape)) for a fixed random r.
GradCheckResult graph_check(const std::string& name, GradScope scope, double tol,
                            const std::vector<Var>& leaves,
                            const std::function<Var(Tape&)>& build,
                            const GradCheckOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  Tape probe_tape(false);
  const std::size_t out_size = build(probe_tape)->value.size();
  const std::vector<double> r = gaussian(out_size, 1.0, rng);
  auto dot = [&r](const Tensor& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
    return s;
  };

  Tape tape;
  Var y = build(tape);
  Var loss = nn::external_scalar(tape, dot(y->value), y,
                                 Tensor(y->value.shape(), r));
  tape.backward(loss);
  std::vector<Probe> probes;
  for (const Var& v : leaves) {
    std::vector<double> g(v->value.size(), 0.0);
    if (v->grad.size() == v->value.size()) g.assign(v->grad.data().begin(), v->grad.data().end());
    probes.push_back({v->value.data(), std::move(g)});
  }
  auto f = [&] {
    Tape t(false);
    return dot(build(t)->value);
  };
  std::size_t coords = 0;
  const double err = compare(f, probes, opts, &coords);
  return finish(name, scope, tol, err, coords);
}

using VectorLoss = std::function<LossValue(std::span<const double>, bool)>;

GradCheckResult vector_check(const std::string& name, std::vector<double> x,
                             const VectorLoss& loss, const GradCheckOptions& opts) {
  std::vector<Probe> probes{{x, loss(x, true).grad}};
  auto f = [&] { return loss(x, false).value; };
  std::size_t coords = 0;
  const double err = compare(f, probes, opts, &coords);
  return finish(name, GradScope::kLosses, kLayerTol, err, coords);
}

// Pred/ref pair with a shared component so the cosine term is informative.
// pred = gain * ref + noise; a gain away from 1 keeps the log-mel differences
// away from the kink of |.|.
std::pair<std::vector<double>, std::vector<double>> signal_pair(std::size_t n,
                                                                std::uint64_t seed,
                                                                double gain = 0.7) {
  std::mt19937_64 rng(seed);
  std::vector<double> ref = gaussian(n, 0.3, rng);
  std::vector<double> pred = gaussian(n, gain == 0.7 ? 0.15 : 0.02, rng);
  for (std::size_t i = 0; i < n; ++i) {
    ref[i] += 0.4 * std::sin(2.0 * M_PI * 150.0 * i / 16000.0);
    pred[i] += gain * ref[i];
  }
  return {pred, ref};
}

GradCheck spectral_scale_check(int scale, double gain) {
  const std::string name = "loss.spectral.w" + std::to_string(scale);
  return {name, GradScope::kLosses, kLayerTol, [name, scale, gain](const GradCheckOptions& o) {
            auto [pred, ref] = signal_pair(2048, o.seed + scale, gain);
            LossConfig cfg;
            cfg.spectral_scales = {scale};
            const SignalBuffer r{ref, kPipelineRate};
            return vector_check(
                name, pred,
                [&](std::span<const double> x, bool g) {
                  return spectral_loss({{x.begin(), x.end()}, kPipelineRate}, r, cfg, g);
                },
                o);
          }};
}

GradCheck reco_check(const std::string& tag, bool spec, bool l1l2, bool cos) {
  const std::string name = "loss.reconstruction." + tag;
  return {name, GradScope::kLosses, kLayerTol,
          [name, spec, l1l2, cos](const GradCheckOptions& o) {
            auto [pred, ref] = signal_pair(1024, o.seed + 7, 1.8);
            LossConfig cfg;
            cfg.spectral_scales = {32, 128, 512};
            cfg.include_spectral = spec;
            cfg.include_time_l1l2 = l1l2;
            cfg.include_time_cos = cos;
            const SignalBuffer r{ref, kPipelineRate};
            return vector_check(
                name, pred,
                [&](std::span<const double> x, bool g) {
                  ReconstructionLoss l =
                      reconstruction_loss({{x.begin(), x.end()}, kPipelineRate}, r, cfg, g);
                  return LossValue{l.report.l_reco, std::move(l.grad)};
                },
                o);
          }};
}

GradCheck log_mel_check(int window) {
  const std::string name = "loss.log_mel.w" + std::to_string(window);
  return {name, GradScope::kLosses, kLayerTol, [name, window](const GradCheckOptions& o) {
            auto [x, unused] = signal_pair(1500, o.seed + 3 * window);
            (void)unused;
            const MelSpectrogram shape = log_mel({x, kPipelineRate}, window);
            std::mt19937_64 rng(o.seed);
            Matrix up(shape.values.rows(), shape.values.cols());
            for (Eigen::Index i = 0; i < up.size(); ++i) {
              up.data()[i] = gaussian(1, 1.0, rng)[0];
            }
            return vector_check(
                name, x,
                [&](std::span<const double> s, bool g) {
                  const SignalBuffer sig{{s.begin(), s.end()}, kPipelineRate};
                  LossValue v;
                  v.value = (log_mel(sig, window).values.array() * up.array()).sum();
                  if (g) v.grad = log_mel_backward(sig, window, up);
                  return v;
                },
                o);
          }};
}

GradCheck conv_check(const std::string& label, int cin, int cout, int k, nn::ConvSpec spec,
                     int t) {
  const std::string name = "layer.conv1d." + label;
  return {name, GradScope::kLayers, kLayerTol, [=](const GradCheckOptions& o) {
            std::mt19937_64 rng(o.seed + 11);
            nn::Conv1dLayer layer(cin, cout, k, spec, rng);
            layer.bias()->value = gaussian_tensor({cout}, 0.1, rng);
            Var x = nn::leaf(gaussian_tensor({2, cin, t}, 1.0, rng));
            return graph_check(name, GradScope::kLayers, kLayerTol,
                               {x, layer.weight(), layer.bias()},
                               [&](Tape& tape) { return layer.forward(tape, x); }, o);
          }};
}

GradCheck conv_transpose_check(const std::string& label, int cin, int cout, int k,
                               int stride, nn::Padding pad, int t) {
  const std::string name = "layer.conv_transpose1d." + label;
  return {name, GradScope::kLayers, kLayerTol, [=](const GradCheckOptions& o) {
            std::mt19937_64 rng(o.seed + 13);
            Var x = nn::leaf(gaussian_tensor({2, cin, t}, 1.0, rng));
            Var w = nn::leaf(gaussian_tensor({cin, cout, k}, 0.5, rng));
            Var b = nn::leaf(gaussian_tensor({cout}, 0.1, rng));
            return graph_check(name, GradScope::kLayers, kLayerTol, {x, w, b},
                               [&](Tape& tape) {
                                 return nn::conv_transpose1d(tape, x, w, b, stride, pad);
                               },
                               o);
          }};
}

GradCheck pointwise_check(const std::string& label, Var (*op)(Tape&, const Var&)) {
  const std::string name = "layer." + label;
  return {name, GradScope::kLayers, kLayerTol, [=](const GradCheckOptions& o) {
            std::mt19937_64 rng(o.seed + 17);
            Var x = nn::leaf(gaussian_tensor({2, 3, 40}, 1.5, rng));
            // Keep clear of the ELU kink at 0.
            for (double& v : x->value.data()) {
              if (std::abs(v) < 1e-2) v += 0.05;
            }
            return graph_check(name, GradScope::kLayers, kLayerTol, {x},
                               [&](Tape& tape) { return op(tape, x); }, o);
          }};
}

std::vector<Var> leaves_of(const nn::ParameterList& params) {
  std::vector<Var> out;
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

// Gives the zero-initialized biases nonzero values so their gradients and the
// activations away from zero are exercised.
void jitter_biases(const nn::ParameterList& params, std::mt19937_64& rng) {
  for (const auto& p : params) {
    if (p.var->value.rank() == 1) p.var->value = gaussian_tensor(p.var->value.shape(), 0.05, rng);
  }
}

std::vector<GradCheck> build_registry() {
  std::vector<GradCheck> r;
  const double lt = kLayerTol;

  r.push_back({"loss.cosine_distance", GradScope::kLosses, lt, [](const GradCheckOptions& o) {
                 auto [a, b] = signal_pair(300, o.seed);
                 return vector_check("loss.cosine_distance", a,
                                     [&](std::span<const double> x, bool g) {
                                       return cosine_distance(x, b, g);
                                     },
                                     o);
               }});
  r.push_back({"loss.cosine_distance.opposed", GradScope::kLosses, lt,
               [](const GradCheckOptions& o) {
                 auto [a, b] = signal_pair(300, o.seed + 1);
                 for (double& v : a) v = -v;
                 return vector_check("loss.cosine_distance.opposed", a,
                                     [&](std::span<const double> x, bool g) {
                                       return cosine_distance(x, b, g);
                                     },
                                     o);
               }});
  r.push_back({"loss.time", GradScope::kLosses, lt, [](const GradCheckOptions& o) {
                 auto [a, b] = signal_pair(400, o.seed + 2);
                 const LossConfig cfg;
                 return vector_check("loss.time", a,
                                     [&](std::span<const double> x, bool g) {
                                       return time_loss(x, b, cfg, g);
                                     },
                                     o);
               }});
  // Alternate louder and quieter predictions so both signs of the log-mel
  // difference are covered.
  for (int s : {32, 128, 512}) r.push_back(spectral_scale_check(s, 1.8));
  for (int s : {64, 256, 1024}) r.push_back(spectral_scale_check(s, 0.55));
  r.push_back({"loss.spectral.all_scales", GradScope::kLosses, lt,
               [](const GradCheckOptions& o) {
                 auto [pred, ref] = signal_pair(2048, o.seed + 5, 0.55);
                 const LossConfig cfg;
                 const SignalBuffer rb{ref, kPipelineRate};
                 return vector_check("loss.spectral.all_scales", pred,
                                     [&](std::span<const double> x, bool g) {
                                       return spectral_loss({{x.begin(), x.end()}, kPipelineRate},
                                                            rb, cfg, g);
                                     },
                                     o);
               }});
  r.push_back(log_mel_check(64));
  r.push_back(log_mel_check(256));
  r.push_back(reco_check("optimal", true, true, true));
  r.push_back(reco_check("cos", true, false, true));
  r.push_back(reco_check("l1l2", true, true, false));
  r.push_back(reco_check("no_time", true, false, false));
  r.push_back(reco_check("no_freq", false, true, true));

  using nn::Padding;
  r.push_back(conv_check("same.k7", 1, 4, 7, {1, 1, Padding::kSame}, 37));
  r.push_back(conv_check("same.k3", 3, 5, 3, {1, 1, Padding::kSame}, 29));
  r.push_back(conv_check("pointwise", 4, 3, 1, {1, 1, Padding::kSame}, 20));
  r.push_back(conv_check("causal.k3", 3, 2, 3, {1, 1, Padding::kCausal}, 25));
  r.push_back(conv_check("causal.dilation2", 2, 3, 3, {1, 2, Padding::kCausal}, 30));
  r.push_back(conv_check("same.dilation4", 3, 3, 3, {1, 4, Padding::kSame}, 33));
  r.push_back(conv_check("stride2.k4", 3, 4, 4, {2, 1, Padding::kSame}, 32));
  r.push_back(conv_check("stride4.k8", 2, 3, 8, {4, 1, Padding::kSame}, 35));
  r.push_back(conv_check("stride3.causal", 2, 2, 5, {3, 1, Padding::kCausal}, 31));
  r.push_back(conv_transpose_check("stride2.k4", 4, 3, 4, 2, Padding::kSame, 12));
  r.push_back(conv_transpose_check("stride4.k8", 3, 2, 8, 4, Padding::kSame, 9));
  r.push_back(conv_transpose_check("stride2.causal", 2, 3, 5, 2, Padding::kCausal, 10));
  r.push_back(pointwise_check("elu", &nn::elu));
  r.push_back(pointwise_check("tanh", &nn::tanh));
  r.push_back({"layer.residual_unit", GradScope::kLayers, lt, [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 19);
                 nn::ResidualUnit unit(4, 2, nn::Padding::kSame, rng);
                 nn::ParameterList params;
                 unit.collect("unit", params);
                 jitter_biases(params, rng);
                 Var x = nn::leaf(gaussian_tensor({2, 4, 24}, 1.0, rng));
                 std::vector<Var> leaves = leaves_of(params);
                 leaves.push_back(x);
                 return graph_check("layer.residual_unit", GradScope::kLayers, kLayerTol, leaves,
                                    [&](Tape& t) { return unit.forward(t, x); }, o);
               }});
  r.push_back({"layer.rvq_commitment", GradScope::kLayers, lt, [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 23);
                 nn::ResidualVectorQuantizer rvq(2, 16, 6, 0.25, o.seed);
                 Var z = nn::leaf(gaussian_tensor({2, 6, 10}, 1.0, rng));
                 Tape tape;
                 Var commit;
                 rvq.forward(tape, z, false, &commit);
                 tape.backward(commit);
                 std::vector<Probe> probes{{z->value.data(), {z->grad.data().begin(), z->grad.data().end()}}};
                 auto f = [&] {
                   Tape t(false);
                   Var c;
                   rvq.forward(t, z, false, &c);
                   return c->value[0];
                 };
                 std::size_t coords = 0;
                 const double err = compare(f, probes, o, &coords);
                 return finish("layer.rvq_commitment", GradScope::kLayers, kLayerTol, err,
                               coords);
               }});

  r.push_back({"model.micro", GradScope::kModel, lt, [](const GradCheckOptions& o) {
                 // conv k3 (4 params) -> ELU -> conv k5 stride 2 (6 params) -> tanh.
                 std::mt19937_64 rng(o.seed + 29);
                 nn::Conv1dLayer c1(1, 1, 3, {1, 1, nn::Padding::kSame}, rng);
                 nn::Conv1dLayer c2(1, 1, 5, {2, 1, nn::Padding::kSame}, rng);
                 c1.bias()->value[0] = 0.1;
                 c2.bias()->value[0] = -0.05;
                 Var x = nn::constant(gaussian_tensor({1, 1, 32}, 1.0, rng));
                 GradCheckOptions all = o;
                 all.max_coords = 10;
                 return graph_check(
                     "model.micro", GradScope::kModel, kLayerTol,
                     {c1.weight(), c1.bias(), c2.weight(), c2.bias()},
                     [&](Tape& t) {
                       return nn::tanh(t, c2.forward(t, nn::elu(t, c1.forward(t, x))));
                     },
                     all);
               }});
  r.push_back({"model.encoder", GradScope::kModel, kModelTol, [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 31);
                 nn::Model model(nn::ModelConfig{}, o.seed);
                 jitter_biases(model.parameters(), rng);
                 Var x = nn::leaf(gaussian_tensor({1, 1, 256}, 0.5, rng));
                 std::vector<Var> leaves = leaves_of(model.parameters());
                 leaves.push_back(x);
                 return graph_check("model.encoder", GradScope::kModel, kModelTol, leaves,
                                    [&](Tape& t) { return model.encode(t, x); }, o);
               }});
  r.push_back({"model.encoder_jvp", GradScope::kModel, kModelTol,
               [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 37);
                 nn::Model model(nn::ModelConfig{}, o.seed);
                 jitter_biases(model.parameters(), rng);
                 Var x = nn::leaf(gaussian_tensor({1, 1, 256}, 0.5, rng));
                 const std::vector<double> v = gaussian(256, 1.0, rng);
                 // Scalar readout of the latent.
                 Tape probe(false);
                 const Tensor shape = model.encode(probe, x)->value;
                 const Tensor r(shape.shape(), gaussian(shape.size(), 1.0, rng));
                 auto readout = [&](const Tensor& y) {
                   double s = 0.0;
                   for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
                   return s;
                 };
                 Tape tape;
                 Var y = model.encode(tape, x);
                 tape.backward(nn::external_scalar(tape, readout(y->value), y, r));
                 double analytic = 0.0;
                 for (std::size_t i = 0; i < v.size(); ++i) analytic += x->grad[i] * v[i];
                 analytic *= 1.0 + o.perturb;
                 const nn::Storage x0 = x->value.data();
                 auto at = [&](double h) {
                   for (std::size_t i = 0; i < v.size(); ++i) x->value[i] = x0[i] + h * v[i];
                   Tape t(false);
                   return readout(model.encode(t, x)->value);
                 };
                 const double numeric = (at(o.step) - at(-o.step)) / (2.0 * o.step);
                 x->value.data() = x0;
                 const double denom = std::max(std::abs(analytic), std::abs(numeric));
                 const double err = denom > 0.0 ? std::abs(analytic - numeric) / denom : 0.0;
                 return finish("model.encoder_jvp", GradScope::kModel, kModelTol, err, 1);
               }});
  r.push_back({"model.decoder", GradScope::kModel, kModelTol, [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 41);
                 nn::Model model(nn::ModelConfig{}, o.seed);
                 jitter_biases(model.parameters(), rng);
                 Var q = nn::leaf(gaussian_tensor({1, 32, 16}, 0.5, rng));
                 std::vector<Var> leaves = leaves_of(model.parameters());
                 leaves.push_back(q);
                 return graph_check("model.decoder", GradScope::kModel, kModelTol, leaves,
                                    [&](Tape& t) { return model.decode(t, q); }, o);
               }});
  r.push_back({"model.autoencoder", GradScope::kModel, kModelTol,
               [](const GradCheckOptions& o) {
                 std::mt19937_64 rng(o.seed + 43);
                 nn::Model model(nn::ModelConfig{}, o.seed);
                 jitter_biases(model.parameters(), rng);
                 Var x = nn::leaf(gaussian_tensor({1, 1, 256}, 0.5, rng));
                 std::vector<Var> leaves = leaves_of(model.parameters());
                 leaves.push_back(x);
                 // Quantizer bypassed: its forward map is piecewise constant.
                 return graph_check("model.autoencoder", GradScope::kModel, kModelTol, leaves,
                                    [&](Tape& t) { return model.decode(t, model.encode(t, x)); },
                                    o);
               }});
  return r;
}

}  // namespace

std::string_view to_string(GradScope scope) {
  switch (scope) {
    case GradScope::kLosses:
      return "losses";
    case GradScope::kLayers:
      return "layers";
    case GradScope::kModel:
      return "model";
  }
  return "?";
}

std::optional<GradScope> parse_grad_scope(std::string_view name) {
  for (GradScope s : {GradScope::kLosses, GradScope::kLayers, GradScope::kModel}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

const std::vector<GradCheck>& gradcheck_registry() {
  static const std::vector<GradCheck> registry = build_registry();
  return registry;
}

std::vector<GradCheckResult> run_gradchecks(std::optional<GradScope> scope,
                                            const GradCheckOptions& opts) {
  std::vector<GradCheckResult> out;
  for (const GradCheck& c : gradcheck_registry()) {
    if (scope && c.scope != *scope) continue;
    out.push_back(c.run(opts));
  }
  return out;
}

void write_gradcheck_csv(const std::vector<GradCheckResult>& results, std::ostream& out) {
  out << "check,scope,max_rel_err,tolerance,coords,passed\n";
  for (const GradCheckResult& r : results) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), r.max_rel_err, std::chars_format::scientific, 3);
    out << r.name << ',' << to_string(r.scope) << ',' << std::string(buf, res.ptr) << ','
        << r.tolerance << ',' << r.coords << ',' << (r.passed ? 1 : 0) << '\n';
  }
}

}  // namespace eggcodec
