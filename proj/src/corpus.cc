// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eggcodec/errors.h"
#include "eggcodec/f0_track.h"
#include "eggcodec/parallel.h"
#include "eggcodec/preprocess.h"
#include "eggcodec/wav_io.h"

namespace eggcodec {
namespace fs = std::filesystem;
namespace {

constexpr const char* kHeader = "id,audio,egg,f0,seed,egg_highpassed,normalized";

void check_field(const std::string& s) {
  if (s.find_first_of(",\r\n") != std::string::npos) {
    throw DataError("manifest field contains a comma or line break: '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string rel(const fs::path& p, const fs::path& base) {
  return p.lexically_relative(base).generic_string();
}

std::string item_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "utt%04zu", i);
  return buf;
}

}  // namespace

void write_manifest(const Manifest& m, const fs::path& file) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const ManifestEntry& e : m.entries) {
    for (const std::string* f : {&e.id, &e.audio, &e.egg, &e.f0}) check_field(*f);
    out << e.id << ',' << e.audio << ',' << e.egg << ',' << e.f0 << ','
        << (e.seed ? std::to_string(*e.seed) : "") << ',' << (e.egg_highpassed ? 1 : 0) << ','
        << (e.normalized ? 1 : 0) << '\n';
  }
  if (!file.parent_path().empty()) fs::create_directories(file.parent_path());
  std::ofstream f(file, std::ios::binary | std::ios::trunc);
  if (!f || !(f << out.str()) || !f.flush()) {
    throw DataError("cannot write manifest " + file.string());
  }
}

Manifest read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open manifest " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw DataError(file.string() + ": row 1: expected header '" + kHeader + "'");
  }
  Manifest m;
  std::set<std::string> ids;
  for (int row = 2; std::getline(in, line); ++row) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    auto fail = [&](const std::string& what) {
      throw DataError(file.string() + ": row " + std::to_string(row) + ": " + what);
    };
    if (f.size() != 7) fail("expected 7 fields, got " + std::to_string(f.size()));
    ManifestEntry e;
    e.id = f[0];
    e.audio = f[1];
    e.egg = f[2];
    e.f0 = f[3];
    if (e.id.empty()) fail("empty id");
    if (!ids.insert(e.id).second) fail("duplicate id '" + e.id + "'");
    if (!f[4].empty()) {
      std::uint64_t s = 0;
      auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), s);
      if (ec != std::errc() || p != f[4].data() + f[4].size()) fail("bad seed '" + f[4] + "'");
      e.seed = s;
    }
    for (int k : {5, 6}) {
      if (f[static_cast<std::size_t>(k)] != "0" && f[static_cast<std::size_t>(k)] != "1") {
        fail("flag must be 0 or 1");
      }
    }
    e.egg_highpassed = f[5] == "1";
    e.normalized = f[6] == "1";
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest write_synth_corpus(const SynthRanges& ranges, std::size_t n, std::uint64_t seed,
                            const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  Manifest m;
  m.entries.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const std::uint64_t item_seed = derive_seed(seed, i);
    const SynthSpec spec = random_synth_spec(ranges, item_seed);
    const SynthUtterance u = synth_corpus(spec, item_seed);
    const std::string id = item_id(i);
    const fs::path dir = out_dir / id;
    fs::create_directories(dir);
    save_wav(u.audio, dir / "audio.wav");
    save_wav(u.egg, dir / "egg.wav");
    write_f0_csv(u.truth, dir / "truth.csv");
    m.entries[i] = {id, id + "/audio.wav", id + "/egg.wav", id + "/truth.csv", item_seed,
                    false, false};
  });
  write_manifest(m, out_dir / kManifestName);
  return m;
}

Manifest discover_corpus(const fs::path& dir, std::vector<std::string>* problems) {
  auto problem = [&](const std::string& s) {
    if (problems != nullptr) problems->push_back(s);
  };
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  if (fs::exists(dir / kManifestName)) return read_manifest(dir / kManifestName);

  std::vector<fs::path> wavs;
  std::set<fs::path> used;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end());

  Manifest m;
  std::set<std::string> ids;
  auto add = [&](ManifestEntry e) {
    if (!ids.insert(e.id).second) {
      problem(e.id + ": duplicate utterance id, skipped");
      return;
    }
    m.entries.push_back(std::move(e));
  };

  // <d>/audio.wav + <d>/egg.wav
  for (const fs::path& p : wavs) {
    if (p.filename() != "audio.wav") continue;
    const fs::path egg = p.parent_path() / "egg.wav";
    if (!fs::exists(egg)) continue;
    ManifestEntry e;
    e.id = rel(p.parent_path(), dir);
    e.audio = rel(p, dir);
    e.egg = rel(egg, dir);
    for (const char* name : {"truth.csv", "f0.csv"}) {
      if (fs::exists(p.parent_path() / name)) {
        e.f0 = rel(p.parent_path() / name, dir);
        break;
      }
    }
    used.insert(p);
    used.insert(egg);
    add(std::move(e));
  }

  // mic_<key>.wav / lar_<key>.wav
  std::map<std::string, std::pair<fs::path, fs::path>> pairs;
  for (const fs::path& p : wavs) {
    if (used.count(p)) continue;
    const std::string stem = p.stem().string();
    if (stem.rfind("mic_", 0) == 0) {
      pairs[stem.substr(4)].first = p;
      used.insert(p);
    } else if (stem.rfind("lar_", 0) == 0) {
      pairs[stem.substr(4)].second = p;
      used.insert(p);
    }
  }
  for (const auto& [key, pr] : pairs) {
    if (pr.first.empty() || pr.second.empty()) {
      problem(key + ": unpaired " + (pr.first.empty() ? "lar_" : "mic_") + key +
              ".wav, skipped");
      continue;
    }
    add({key, rel(pr.first, dir), rel(pr.second, dir), "", std::nullopt, false, false});
  }

  // <stem>.wav + <stem>.f0.csv
  for (const fs::path& p : wavs) {
    if (used.count(p)) continue;
    const fs::path f0 = p.parent_path() / (p.stem().string() + ".f0.csv");
    if (!fs::exists(f0)) {
      if (p.filename() != "egg.wav") problem(rel(p, dir) + ": no matching EGG or F0 file, skipped");
      continue;
    }
    const fs::path stem_path = p.parent_path() / p.stem();
    add({rel(stem_path, dir), rel(p, dir), "", rel(f0, dir), std::nullopt, false, false});
  }
  return m;
}

PreprocessReport preprocess_corpus(const fs::path& in_dir, const fs::path& out_dir,
                                   bool filter) {
  PreprocessReport report;
  const Manifest found = discover_corpus(in_dir, &report.problems);
  std::vector<std::optional<ManifestEntry>> done(found.entries.size());
  std::vector<std::string> errors(found.entries.size());
  parallel_for(found.entries.size(), [&](std::size_t i) {
    const ManifestEntry& e = found.entries[i];
    try {
      const fs::path dst = out_dir / e.id;
      fs::create_directories(dst);
      ManifestEntry o = e;
      auto ingest = [&](const std::string& path) {
        SignalBuffer s = load_wav(in_dir / path);
        return s.sample_rate_hz == kPipelineRate ? s : resample(s, kPipelineRate);
      };
      if (!e.audio.empty()) {
        SignalBuffer audio = ingest(e.audio);
        if (!e.normalized) audio = peak_normalize(audio);
        save_wav(audio, dst / "audio.wav");
        o.audio = e.id + "/audio.wav";
      }
      if (!e.egg.empty()) {
        SignalBuffer egg = ingest(e.egg);
        if (filter && !e.egg_highpassed) {
          egg = highpass_filter(egg).signal;
          o.egg_highpassed = true;
        }
        if (!e.normalized || o.egg_highpassed != e.egg_highpassed) egg = peak_normalize(egg);
        save_wav(egg, dst / "egg.wav");
        o.egg = e.id + "/egg.wav";
      }
      if (!e.f0.empty()) {
        write_f0_csv(read_f0_csv(in_dir / e.f0), dst / "f0.csv");
        o.f0 = e.id + "/f0.csv";
      }
      o.normalized = true;
      done[i] = std::move(o);
    } catch (const std::exception& ex) {
      errors[i] = e.id + ": " + ex.what();
    }
  });
  for (std::size_t i = 0; i < done.size(); ++i) {
    if (done[i]) {
      report.manifest.entries.push_back(*done[i]);
    } else {
      report.problems.push_back(errors[i]);
    }
  }
  write_manifest(report.manifest, out_dir / kManifestName);
  return report;
}

Corpus load_training_corpus(const fs::path& dir) {
  const Manifest m = discover_corpus(dir, nullptr);
  Corpus corpus;
  for (const ManifestEntry& e : m.entries) {
    if (e.audio.empty() || e.egg.empty()) continue;
    TrainingPair p;
    p.id = e.id;
    p.audio = load_wav(dir / e.audio);
    p.egg = load_wav(dir / e.egg);
    if (p.audio.sample_rate_hz != kPipelineRate) p.audio = resample(p.audio, kPipelineRate);
    if (p.egg.sample_rate_hz != kPipelineRate) p.egg = resample(p.egg, kPipelineRate);
    p.egg_highpassed = e.egg_highpassed;
    p.normalized = e.normalized;
    corpus.push_back(std::move(p));
  }
  if (corpus.empty()) throw DataError("no speech/EGG pairs found in " + dir.string());
  return corpus;
}

}  // namespace eggcodec
