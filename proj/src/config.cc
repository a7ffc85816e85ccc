// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "eggcodec/errors.h"

namespace eggcodec {
namespace {

constexpr std::array<std::string_view, 10> kTagNames = {
    "optimal", "cos",    "l1l2",   "no_time",            "no_freq",
    "nda5",    "nda7",   "no_nda", "no_gan_placeholder", "unfiltered"};

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <typename T>
T get(const YAML::Node& n, const std::string& key, const char* type) {
  if (!n.IsScalar()) throw ConfigError(key + ": expected " + type, line_of(n));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": expected " + type + ", got '" + n.Scalar() + "'", line_of(n));
  }
}

double get_double(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar() && (n.Scalar() == "clean" || n.Scalar() == "inf")) {
    return std::numeric_limits<double>::infinity();
  }
  return get<double>(n, key, "a number");
}

int get_int(const YAML::Node& n, const std::string& key) {
  return get<int>(n, key, "an integer");
}

template <typename T, typename F>
std::vector<T> get_list(const YAML::Node& n, const std::string& key, F item) {
  if (!n.IsSequence()) throw ConfigError(key + ": expected a list", line_of(n));
  std::vector<T> out;
  for (const YAML::Node& e : n) out.push_back(item(e, key));
  return out;
}

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

void walk_map(const YAML::Node& node, const std::string& section,
              const std::map<std::string, Handler>& handlers) {
  if (!node.IsMap()) {
    throw ConfigError((section.empty() ? std::string("document") : section) +
                          ": expected a mapping",
                      line_of(node));
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = section.empty() ? key : section + "." + key;
    auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("unknown key '" + full + "'", line_of(kv.first));
    it->second(kv.second, full);
  }
}

template <typename F>
void checked(const YAML::Node& n, F validate_fn) {
  try {
    validate_fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), line_of(n));
  }
}

// Settings a tag controls, with the line where the file set them explicitly.
struct Explicit {
  std::map<std::string, int> lines;
};

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

template <typename T, typename F>
std::string flow(const std::vector<T>& v, F fmt) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string_view to_string(AblationTag tag) {
  return kTagNames[static_cast<std::size_t>(tag)];
}

std::optional<AblationTag> parse_ablation_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<AblationTag>(i);
  }
  return std::nullopt;
}

AblationToggles ablation_toggles(AblationTag tag) {
  AblationToggles t;
  t.snr_levels_db = TrainConfig{}.snr_levels_db;
  switch (tag) {
    case AblationTag::kOptimal:
    case AblationTag::kNoGanPlaceholder:
      break;
    case AblationTag::kCos:
      t.include_time_l1l2 = false;
      break;
    case AblationTag::kL1L2:
      t.include_time_cos = false;
      break;
    case AblationTag::kNoTime:
      t.include_time_l1l2 = false;
      t.include_time_cos = false;
      break;
    case AblationTag::kNoFreq:
      t.include_spectral = false;
      break;
    case AblationTag::kNda5:
      t.snr_levels_db = {5.0};
      break;
    case AblationTag::kNda7:
      t.snr_levels_db = {7.0};
      break;
    case AblationTag::kNoNda:
      t.snr_levels_db = {kCleanSnr};
      break;
    case AblationTag::kUnfiltered:
      t.filter_refs = false;
      break;
  }
  return t;
}

namespace {

void apply(const AblationToggles& t, ExperimentConfig& c) {
  c.train.loss_cfg.include_spectral = t.include_spectral;
  c.train.loss_cfg.include_time_l1l2 = t.include_time_l1l2;
  c.train.loss_cfg.include_time_cos = t.include_time_cos;
  c.train.snr_levels_db = t.snr_levels_db;
  c.train.filter_refs = t.filter_refs;
}

}  // namespace

ExperimentConfig expand_tag(AblationTag tag) {
  ExperimentConfig c;
  c.ablation_tag = tag;
  c.out_dir = std::filesystem::path("runs") / std::string(to_string(tag));
  apply(ablation_toggles(tag), c);
  return c;
}

void validate(const SynthRanges& r) {
  if (r.sample_rate_hz <= 0) throw std::invalid_argument("synth.sample_rate_hz must be > 0");
  if (!(r.min_duration_s > 0.0 && r.min_duration_s <= r.max_duration_s)) {
    throw std::invalid_argument("synth durations must satisfy 0 < min <= max");
  }
  if (!(r.min_f0_hz >= kMinF0 && r.min_f0_hz <= r.max_f0_hz && r.max_f0_hz <= kMaxF0)) {
    throw std::invalid_argument("synth F0 range must lie within [50, 600] Hz");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(r.glide_probability) || !prob(r.gap_probability)) {
    throw std::invalid_argument("synth probabilities must lie in [0, 1]");
  }
  if (!(r.gap_fraction >= 0.0 && r.gap_fraction <= 0.5)) {
    throw std::invalid_argument("synth.gap_fraction must lie in [0, 0.5]");
  }
  if (!(r.noise_floor >= 0.0)) throw std::invalid_argument("synth.noise_floor must be >= 0");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  ExperimentConfig c;
  if (root.IsNull()) {
    apply(ablation_toggles(c.ablation_tag), c);
    return c;
  }
  Explicit expl;
  TrainConfig& t = c.train;
  LossConfig& l = t.loss_cfg;
  nn::ModelConfig& m = c.model;
  SynthRanges& s = c.synth;
  YAML::Node train_node, model_node, synth_node;

  const std::map<std::string, Handler> loss_h = {
      {"lambda", [&](auto& n, auto& k) { l.lambda = get_double(n, k); }},
      {"spectral_scales",
       [&](auto& n, auto& k) { l.spectral_scales = get_list<int>(n, k, get_int); }},
      {"include_spectral",
       [&](auto& n, auto& k) {
         l.include_spectral = get<bool>(n, k, "true or false");
         expl.lines["include_spectral"] = line_of(n);
       }},
      {"include_time_l1l2",
       [&](auto& n, auto& k) {
         l.include_time_l1l2 = get<bool>(n, k, "true or false");
         expl.lines["include_time_l1l2"] = line_of(n);
       }},
      {"include_time_cos",
       [&](auto& n, auto& k) {
         l.include_time_cos = get<bool>(n, k, "true or false");
         expl.lines["include_time_cos"] = line_of(n);
       }},
  };
  const std::map<std::string, Handler> train_h = {
      {"lr", [&](auto& n, auto& k) { t.lr = get_double(n, k); }},
      {"beta1", [&](auto& n, auto& k) { t.beta1 = get_double(n, k); }},
      {"beta2", [&](auto& n, auto& k) { t.beta2 = get_double(n, k); }},
      {"epsilon", [&](auto& n, auto& k) { t.epsilon = get_double(n, k); }},
      {"batch_size", [&](auto& n, auto& k) { t.batch_size = get_int(n, k); }},
      {"epochs", [&](auto& n, auto& k) { t.epochs = get_int(n, k); }},
      {"crop_len", [&](auto& n, auto& k) { t.crop_len = get_int(n, k); }},
      {"snr_levels_db",
       [&](auto& n, auto& k) {
         t.snr_levels_db = get_list<double>(n, k, get_double);
         expl.lines["snr_levels_db"] = line_of(n);
       }},
      {"seed", [&](auto& n, auto& k) { t.seed = get<std::uint64_t>(n, k, "a non-negative integer"); }},
      {"filter_refs",
       [&](auto& n, auto& k) {
         t.filter_refs = get<bool>(n, k, "true or false");
         expl.lines["filter_refs"] = line_of(n);
       }},
      {"loss_cfg", [&](auto& n, auto& k) { walk_map(n, k, loss_h); }},
  };
  const std::map<std::string, Handler> model_h = {
      {"base_channels", [&](auto& n, auto& k) { m.base_channels = get_int(n, k); }},
      {"n_down_blocks", [&](auto& n, auto& k) { m.n_down_blocks = get_int(n, k); }},
      {"strides", [&](auto& n, auto& k) { m.strides = get_list<int>(n, k, get_int); }},
      {"residual_units_per_block",
       [&](auto& n, auto& k) { m.residual_units_per_block = get_int(n, k); }},
      {"latent_dim", [&](auto& n, auto& k) { m.latent_dim = get_int(n, k); }},
      {"timing_dilations",
       [&](auto& n, auto& k) { m.timing_dilations = get_list<int>(n, k, get_int); }},
      {"rvq_stages", [&](auto& n, auto& k) { m.rvq_stages = get_int(n, k); }},
      {"codebook_size", [&](auto& n, auto& k) { m.codebook_size = get_int(n, k); }},
      {"commitment_weight", [&](auto& n, auto& k) { m.commitment_weight = get_double(n, k); }},
  };
  const std::map<std::string, Handler> synth_h = {
      {"sample_rate_hz", [&](auto& n, auto& k) { s.sample_rate_hz = get_int(n, k); }},
      {"min_duration_s", [&](auto& n, auto& k) { s.min_duration_s = get_double(n, k); }},
      {"max_duration_s", [&](auto& n, auto& k) { s.max_duration_s = get_double(n, k); }},
      {"min_f0_hz", [&](auto& n, auto& k) { s.min_f0_hz = get_double(n, k); }},
      {"max_f0_hz", [&](auto& n, auto& k) { s.max_f0_hz = get_double(n, k); }},
      {"glide_probability", [&](auto& n, auto& k) { s.glide_probability = get_double(n, k); }},
      {"gap_probability", [&](auto& n, auto& k) { s.gap_probability = get_double(n, k); }},
      {"gap_fraction", [&](auto& n, auto& k) { s.gap_fraction = get_double(n, k); }},
      {"noise_floor", [&](auto& n, auto& k) { s.noise_floor = get_double(n, k); }},
  };
  const std::map<std::string, Handler> root_h = {
      {"train",
       [&](auto& n, auto& k) {
         train_node = n;
         walk_map(n, k, train_h);
       }},
      {"model",
       [&](auto& n, auto& k) {
         model_node = n;
         walk_map(n, k, model_h);
       }},
      {"synth",
       [&](auto& n, auto& k) {
         synth_node = n;
         walk_map(n, k, synth_h);
       }},
      {"corpus_dir", [&](auto& n, auto& k) { c.corpus_dir = get<std::string>(n, k, "a path"); }},
      {"eval_dir", [&](auto& n, auto& k) { c.eval_dir = get<std::string>(n, k, "a path"); }},
      {"out_dir", [&](auto& n, auto& k) { c.out_dir = get<std::string>(n, k, "a path"); }},
      {"ablation_tag",
       [&](auto& n, auto& k) {
         const std::string name = get<std::string>(n, k, "a tag name");
         auto tag = parse_ablation_tag(name);
         if (!tag) throw ConfigError("unknown ablation_tag '" + name + "'", line_of(n));
         c.ablation_tag = *tag;
       }},
  };
  walk_map(root, "", root_h);

  const AblationToggles tg = ablation_toggles(c.ablation_tag);
  auto conflict = [&](const char* key, bool differs) {
    auto it = expl.lines.find(key);
    if (it != expl.lines.end() && differs) {
      throw ConfigError(std::string(key) + " contradicts ablation_tag " +
                            std::string(to_string(c.ablation_tag)),
                        it->second);
    }
  };
  conflict("include_spectral", l.include_spectral != tg.include_spectral);
  conflict("include_time_l1l2", l.include_time_l1l2 != tg.include_time_l1l2);
  conflict("include_time_cos", l.include_time_cos != tg.include_time_cos);
  conflict("snr_levels_db", t.snr_levels_db != tg.snr_levels_db);
  conflict("filter_refs", t.filter_refs != tg.filter_refs);
  apply(tg, c);

  checked(train_node ? train_node : root, [&] { validate(t); });
  checked(model_node ? model_node : root, [&] { nn::validate(m); });
  checked(synth_node ? synth_node : root, [&] { validate(s); });
  checked(train_node ? train_node : root, [&] {
    if (t.crop_len % nn::total_stride(m) != 0) {
      throw std::invalid_argument("train.crop_len must be a multiple of the model stride");
    }
  });
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string(), e);
  }
}

std::string to_yaml(const ExperimentConfig& c) {
  const TrainConfig& t = c.train;
  const LossConfig& l = t.loss_cfg;
  const nn::ModelConfig& m = c.model;
  const SynthRanges& s = c.synth;
  auto i = [](int v) { return std::to_string(v); };
  std::ostringstream o;
  o << "ablation_tag: " << to_string(c.ablation_tag) << "\n"
    << "corpus_dir: " << c.corpus_dir.generic_string() << "\n"
    << "eval_dir: " << c.eval_dir.generic_string() << "\n"
    << "out_dir: " << c.out_dir.generic_string() << "\n"
    << "train:\n"
    << "  lr: " << num(t.lr) << "\n"
    << "  beta1: " << num(t.beta1) << "\n"
    << "  beta2: " << num(t.beta2) << "\n"
    << "  epsilon: " << num(t.epsilon) << "\n"
    << "  batch_size: " << t.batch_size << "\n"
    << "  epochs: " << t.epochs << "\n"
    << "  crop_len: " << t.crop_len << "\n"
    << "  snr_levels_db: " << flow(t.snr_levels_db, num) << "\n"
    << "  seed: " << t.seed << "\n"
    << "  filter_refs: " << boolean(t.filter_refs) << "\n"
    << "  loss_cfg:\n"
    << "    lambda: " << num(l.lambda) << "\n"
    << "    spectral_scales: " << flow(l.spectral_scales, i) << "\n"
    << "    include_spectral: " << boolean(l.include_spectral) << "\n"
    << "    include_time_l1l2: " << boolean(l.include_time_l1l2) << "\n"
    << "    include_time_cos: " << boolean(l.include_time_cos) << "\n"
    << "model:\n"
    << "  base_channels: " << m.base_channels << "\n"
    << "  n_down_blocks: " << m.n_down_blocks << "\n"
    << "  strides: " << flow(m.strides, i) << "\n"
    << "  residual_units_per_block: " << m.residual_units_per_block << "\n"
    << "  latent_dim: " << m.latent_dim << "\n"
    << "  timing_dilations: " << flow(m.timing_dilations, i) << "\n"
    << "  rvq_stages: " << m.rvq_stages << "\n"
    << "  codebook_size: " << m.codebook_size << "\n"
    << "  commitment_weight: " << num(m.commitment_weight) << "\n"
    << "synth:\n"
    << "  sample_rate_hz: " << s.sample_rate_hz << "\n"
    << "  min_duration_s: " << num(s.min_duration_s) << "\n"
    << "  max_duration_s: " << num(s.max_duration_s) << "\n"
    << "  min_f0_hz: " << num(s.min_f0_hz) << "\n"
    << "  max_f0_hz: " << num(s.max_f0_hz) << "\n"
    << "  glide_probability: " << num(s.glide_probability) << "\n"
    << "  gap_probability: " << num(s.gap_probability) << "\n"
    << "  gap_fraction: " << num(s.gap_fraction) << "\n"
    << "  noise_floor: " << num(s.noise_floor) << "\n";
  return o.str();
}

}  // namespace eggcodec
