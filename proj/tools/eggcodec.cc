// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Command-line front end: synth | preprocess | train | reconstruct | extract |
// evaluate | gradcheck.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eggcodec/config.h"
#include "eggcodec/corpus.h"
#include "eggcodec/errors.h"
#include "eggcodec/f0_extract.h"
#include "eggcodec/gradcheck.h"
#include "eggcodec/inference.h"
#include "eggcodec/metrics.h"
#include "eggcodec/nn/checkpoint.h"
#include "eggcodec/parallel.h"
#include "eggcodec/trainer.h"
#include "eggcodec/wav_io.h"

namespace fs = std::filesystem;
using namespace eggcodec;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4, kCheckFailed = 5 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void info(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) throw DataError("cannot write " + path.string());
}

// ---- synth

int cmd_synth(const Globals& g, std::size_t n) {
  if (g.out.empty()) throw ConfigError("synth needs --out");
  SynthRanges ranges;
  if (!g.config.empty()) ranges = load_experiment_config(g.config).synth;
  const Manifest m = write_synth_corpus(ranges, n, g.seed.value_or(0), g.out);
  info(g, "wrote " + std::to_string(m.entries.size()) + " utterances to " + g.out);
  return kOk;
}

// ---- preprocess

int cmd_preprocess(const Globals& g, const std::string& in, bool no_filter) {
  if (g.out.empty()) throw ConfigError("preprocess needs --out");
  const PreprocessReport r = preprocess_corpus(in, g.out, !no_filter);
  for (const std::string& p : r.problems) std::cerr << "warning: " << p << '\n';
  info(g, "processed " + std::to_string(r.manifest.entries.size()) + " utterances (" +
              std::to_string(r.problems.size()) + " problems), filter=" +
              (no_filter ? "false" : "true"));
  return kOk;
}

// ---- train

int cmd_train(const Globals& g) {
  if (g.config.empty()) throw ConfigError("train needs --config");
  ExperimentConfig cfg = load_experiment_config(g.config);
  if (g.seed) cfg.train.seed = *g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config.yaml", to_yaml(cfg));

  Corpus corpus = load_training_corpus(cfg.corpus_dir);
  std::size_t already_filtered = 0;
  for (const TrainingPair& p : corpus) already_filtered += p.egg_highpassed ? 1 : 0;
  corpus = prepare_corpus(std::move(corpus), cfg.train);
  info(g, "corpus: " + std::to_string(corpus.size()) + " pairs, filter_refs=" +
              (cfg.train.filter_refs ? "true" : "false") + ", tag=" +
              std::string(to_string(cfg.ablation_tag)));

  nn::Model model(cfg.model, derive_seed(cfg.train.seed, 0x4D4F44454Cull));
  std::ofstream loss_csv(cfg.out_dir / "loss.csv", std::ios::trunc);
  if (!loss_csv) throw DataError("cannot write " + (cfg.out_dir / "loss.csv").string());
  write_loss_csv_header(loss_csv);

  FitOptions opts;
  opts.checkpoint_path = cfg.out_dir / "checkpoint.eggc";
  opts.on_step = [&](const StepLoss& s) {
    write_loss_csv_row(s, loss_csv);
    loss_csv.flush();
    if (!g.quiet && (s.step == 1 || s.step % 10 == 0)) {
      std::fprintf(stderr, "step %lld  l_reco %.5g  l_s %.4g  l_t %.4g  commit %.4g\n",
                   static_cast<long long>(s.step), s.l_reco, s.l_s, s.l_t, s.commit);
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  const FitResult r = fit(model, corpus, cfg.train, opts);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.curve.empty()) nn::save_checkpoint(model, opts.checkpoint_path);

  nlohmann::json summary = {
      {"ablation_tag", std::string(to_string(cfg.ablation_tag))},
      {"steps", r.curve.size()},
      {"parameters", model.parameter_count()},
      {"filter_refs", cfg.train.filter_refs},
      {"egg_prefiltered_items", already_filtered},
      {"skipped_items", r.skipped_items},
      {"seconds", seconds},
  };
  if (!r.curve.empty()) {
    summary["first_l_reco"] = r.curve.front().l_reco;
    summary["final_l_reco"] = r.curve.back().l_reco;
  }
  write_text(cfg.out_dir / "train_summary.json", summary.dump(2) + "\n");
  info(g, "trained " + std::to_string(r.curve.size()) + " steps in " +
              std::to_string(seconds) + " s; artifacts in " + cfg.out_dir.string());
  return kOk;
}

// ---- reconstruct / extract

int cmd_reconstruct(const Globals& g, const std::string& checkpoint, const std::string& in,
                    const std::string& out) {
  const nn::Model model = nn::load_checkpoint(checkpoint);
  const SignalBuffer egg = reconstruct_egg(model, load_wav(in));
  save_wav(egg, out);
  info(g, "wrote " + out);
  return kOk;
}

int cmd_extract(const Globals& g, const std::string& in, const std::string& out) {
  SignalBuffer egg = load_wav(in);
  if (egg.sample_rate_hz != kPipelineRate) egg = resample(egg, kPipelineRate);
  const F0Track track = extract_f0(egg);
  write_f0_csv(track, out);
  std::size_t voiced = 0;
  for (std::size_t k = 0; k < track.size(); ++k) voiced += track.voiced(k) ? 1 : 0;
  info(g, "wrote " + out + " (" + std::to_string(voiced) + "/" +
              std::to_string(track.size()) + " voiced frames)");
  return kOk;
}

// ---- evaluate

// Relative path without extension; a trailing truth/f0/egg component names
// the file inside an utterance directory and is dropped.
std::string utterance_key(const fs::path& file, const fs::path& root) {
  fs::path rel = file.lexically_relative(root);
  rel.replace_extension();
  std::string name = rel.filename().string();
  if (name.size() > 3 && name.compare(name.size() - 3, 3, ".f0") == 0) {
    rel.replace_filename(name.substr(0, name.size() - 3));
    name = rel.filename().string();
  }
  if ((name == "truth" || name == "f0" || name == "egg") && rel.has_parent_path()) {
    rel = rel.parent_path();
  }
  return rel.generic_string();
}

std::map<std::string, fs::path> collect(const fs::path& root, const std::string& ext) {
  std::map<std::string, fs::path> out;
  if (fs::is_regular_file(root)) {
    out[""] = root;
    return out;
  }
  if (!fs::is_directory(root)) throw DataError("no such file or directory: " + root.string());
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ext &&
        e.path().filename() != kManifestName) {
      out[utterance_key(e.path(), root)] = e.path();
    }
  }
  return out;
}

int cmd_evaluate(const Globals& g, const std::string& pred, const std::string& ref,
                 const std::string& pred_egg, const std::string& ref_egg,
                 std::string json_out, std::string csv_out, std::string reference_tag) {
  if (json_out.empty()) {
    if (g.out.empty()) throw ConfigError("evaluate needs --json or --out");
    json_out = (fs::path(g.out) / "metrics.json").string();
  }
  if (csv_out.empty()) csv_out = fs::path(json_out).replace_extension(".csv").string();
  if (reference_tag.empty() && !g.config.empty()) {
    reference_tag = std::string(to_string(load_experiment_config(g.config).ablation_tag));
  }
  std::optional<ReferenceValues> reference;
  if (!reference_tag.empty()) {
    reference = reference_values(reference_tag);
    if (!reference) throw ConfigError("unknown reference tag '" + reference_tag + "'");
  }

  const bool single = fs::is_regular_file(pred) && fs::is_regular_file(ref);
  std::map<std::string, fs::path> preds = collect(pred, ".csv");
  std::map<std::string, fs::path> refs = collect(ref, ".csv");
  std::map<std::string, fs::path> pred_eggs, ref_eggs;
  const bool with_egg = !pred_egg.empty() && !ref_egg.empty();
  if (with_egg) {
    pred_eggs = collect(pred_egg, ".wav");
    ref_eggs = collect(ref_egg, ".wav");
  }
  if (single) {
    const fs::path rp = fs::absolute(ref);
    const std::string key = utterance_key(rp, rp.parent_path().parent_path());
    preds = {{key, pred}};
    refs = {{key, ref}};
    if (with_egg) {
      pred_eggs = {{key, pred_egg}};
      ref_eggs = {{key, ref_egg}};
    }
  }

  std::vector<std::string> keys;
  for (const auto& [k, unused] : refs) {
    if (preds.count(k)) {
      keys.push_back(k);
    } else {
      std::cerr << "warning: no prediction for " << k << '\n';
    }
  }
  if (keys.empty()) throw DataError("no prediction matches a reference track");

  std::vector<std::optional<MetricReport>> reports(keys.size());
  std::vector<std::string> errors(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    const std::string& k = keys[i];
    const F0Track p = read_f0_csv(preds.at(k));
    const F0Track r = read_f0_csv(refs.at(k));
    std::optional<SignalBuffer> pe, re;
    if (with_egg && pred_eggs.count(k) && ref_eggs.count(k)) {
      pe = load_wav(pred_eggs.at(k));
      re = load_wav(ref_eggs.at(k));
    }
    try {
      reports[i] = evaluate_run(p, r, pe ? &*pe : nullptr, re ? &*re : nullptr);
    } catch (const UndefinedMetricError& e) {
      errors[i] = e.what();
    }
  });

  nlohmann::json utts = nlohmann::json::array();
  std::vector<MetricReport> ok;
  std::ostringstream csv;
  csv << "id,mae_hz,rpa_pct,gpe_pct,vde_pct,ppmcc,n_frames,n_both_voiced\n";
  auto csv_row = [&csv](const std::string& id, const MetricReport& m) {
    csv << id << ',' << m.mae_hz << ',' << m.rpa_pct << ',' << m.gpe_pct << ',' << m.vde_pct
        << ',' << (m.ppmcc ? std::to_string(*m.ppmcc) : "") << ',' << m.n_frames << ','
        << m.n_both_voiced << '\n';
  };
  csv.precision(10);
  nlohmann::json skipped = nlohmann::json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!reports[i]) {
      std::cerr << "warning: " << keys[i] << ": " << errors[i] << '\n';
      skipped.push_back({{"id", keys[i]}, {"reason", errors[i]}});
      continue;
    }
    nlohmann::json j = *reports[i];
    j["id"] = keys[i];
    utts.push_back(j);
    ok.push_back(*reports[i]);
    csv_row(keys[i], *reports[i]);
  }
  if (ok.empty()) throw DataError("every utterance had an undefined metric");
  MetricReport agg = aggregate(ok);
  agg.reference = reference;
  csv_row("mean", agg);

  nlohmann::json doc = {{"utterances", utts}, {"aggregate", agg}, {"skipped", skipped}};
  write_text(json_out, doc.dump(2) + "\n");
  write_text(csv_out, csv.str());
  if (!g.quiet) {
    std::fprintf(stderr, "%zu utterances: MAE %.3f Hz  RPA %.2f%%  GPE %.2f%%  VDE %.2f%%",
                 ok.size(), agg.mae_hz, agg.rpa_pct, agg.gpe_pct, agg.vde_pct);
    if (agg.ppmcc) std::fprintf(stderr, "  PPMCC %.4f", *agg.ppmcc);
    std::fprintf(stderr, "\n");
  }
  return kOk;
}

// ---- gradcheck

int cmd_gradcheck(const Globals& g, const std::string& scope_name, std::string csv_out,
                  double perturb) {
  std::optional<GradScope> scope;
  if (scope_name != "all") {
    scope = parse_grad_scope(scope_name);
    if (!scope) throw ConfigError("unknown scope '" + scope_name + "'");
  }
  GradCheckOptions opts;
  opts.perturb = perturb;
  if (g.seed) opts.seed = *g.seed;
  const std::vector<GradCheckResult> results = run_gradchecks(scope, opts);
  if (csv_out.empty() && !g.out.empty()) csv_out = (fs::path(g.out) / "gradcheck.csv").string();
  if (csv_out.empty()) {
    write_gradcheck_csv(results, std::cout);
  } else {
    std::ostringstream s;
    write_gradcheck_csv(results, s);
    write_text(csv_out, s.str());
  }
  std::size_t failed = 0;
  for (const GradCheckResult& r : results) {
    if (!r.passed) ++failed;
    if (!g.quiet) {
      std::fprintf(stderr, "%-40s %-6s max_rel_err %.3e (tol %.0e) %s\n", r.name.c_str(),
                   std::string(to_string(r.scope)).c_str(), r.max_rel_err, r.tolerance,
                   r.passed ? "ok" : "FAIL");
    }
  }
  info(g, std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) +
              " checks passed");
  return failed == 0 ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eggcodec: speech to EGG reconstruction and EGG-based F0 extraction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment config (YAML)");
  app.add_option("--seed", g.seed, "Seed override");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "Only print warnings and errors");

  std::size_t n_utts = 10;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic speech/EGG/F0 corpus");
  synth->add_option("-n,--n-utts", n_utts, "Number of utterances");

  std::string pre_in;
  bool no_filter = false;
  auto* pre = app.add_subcommand("preprocess", "Resample, filter and normalize a corpus");
  pre->add_option("--in", pre_in, "Input corpus directory")->required();
  pre->add_flag("--no-filter", no_filter, "Leave the EGG unfiltered");

  auto* train = app.add_subcommand("train", "Train a model from --config");

  std::string ckpt, rec_in, rec_out;
  auto* rec = app.add_subcommand("reconstruct", "Predict the EGG of a speech file");
  rec->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  rec->add_option("wav_in", rec_in, "Speech WAV")->required();
  rec->add_option("wav_out", rec_out, "EGG WAV to write")->required();

  std::string ex_in, ex_out;
  auto* ext = app.add_subcommand("extract", "Extract an F0 track from an EGG file");
  ext->add_option("wav_in", ex_in, "EGG WAV")->required();
  ext->add_option("csv_out", ex_out, "F0 CSV to write")->required();

  std::string ev_pred, ev_ref, ev_pred_egg, ev_ref_egg, ev_json, ev_csv, ev_tag;
  auto* ev = app.add_subcommand("evaluate", "Score predicted F0 tracks against references");
  ev->add_option("--pred", ev_pred, "Predicted F0 CSV or directory")->required();
  ev->add_option("--ref", ev_ref, "Reference F0 CSV or directory")->required();
  ev->add_option("--pred-egg", ev_pred_egg, "Predicted EGG WAV or directory");
  ev->add_option("--ref-egg", ev_ref_egg, "Reference EGG WAV or directory");
  ev->add_option("--json", ev_json, "Report JSON path (default <out>/metrics.json)");
  ev->add_option("--csv", ev_csv, "Per-utterance CSV path (default next to the JSON)");
  ev->add_option("--reference", ev_tag, "Annotate with published values for this tag");

  std::string gc_scope = "all", gc_csv;
  double gc_perturb = 0.0;
  auto* gc = app.add_subcommand("gradcheck", "Run the finite-difference gradient checks");
  gc->add_option("--scope", gc_scope, "losses, layers, model or all")
      ->check(CLI::IsMember({"losses", "layers", "model", "all"}));
  gc->add_option("--csv", gc_csv, "CSV path (default <out>/gradcheck.csv, else stdout)");
  gc->add_option("--perturb", gc_perturb, "Scale analytic gradients by 1 + x (harness test)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) return cmd_synth(g, n_utts);
    if (*pre) return cmd_preprocess(g, pre_in, no_filter);
    if (*train) return cmd_train(g);
    if (*rec) return cmd_reconstruct(g, ckpt, rec_in, rec_out);
    if (*ext) return cmd_extract(g, ex_in, ex_out);
    if (*ev) {
      return cmd_evaluate(g, ev_pred, ev_ref, ev_pred_egg, ev_ref_egg, ev_json, ev_csv, ev_tag);
    }
    if (*gc) return cmd_gradcheck(g, gc_scope, gc_csv, gc_perturb);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
