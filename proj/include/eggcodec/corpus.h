// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_CORPUS_H_
#define EGGCODEC_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eggcodec/synth.h"
#include "eggcodec/trainer.h"

namespace eggcodec {

inline constexpr const char* kManifestName = "manifest.csv";

// One utterance. Paths are relative to the manifest's directory; an empty
// path means the item has no such file.
struct ManifestEntry {
  std::string id;
  std::string audio;
  std::string egg;
  std::string f0;
  std::optional<std::uint64_t> seed;  // synthetic items only
  bool egg_highpassed = false;
  bool normalized = false;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// CSV: id,audio,egg,f0,seed,egg_highpassed,normalized. Fields may not
// contain commas or line breaks (DataError).
void write_manifest(const Manifest& m, const std::filesystem::path& file);
// DataError naming the row for schema violations.
Manifest read_manifest(const std::filesystem::path& file);

// n random utterances under out_dir: <id>/audio.wav, <id>/egg.wav,
// <id>/truth.csv and the manifest. Item i uses seed derive_seed(seed, i).
Manifest write_synth_corpus(const SynthRanges& ranges, std::size_t n, std::uint64_t seed,
                            const std::filesystem::path& out_dir);

// Finds utterances under `dir`, in order of preference:
//   - a manifest.csv at the top,
//   - directories holding audio.wav and egg.wav (id = relative directory),
//   - mic_<key>.wav / lar_<key>.wav speech/EGG pairs anywhere below (id = key),
//   - <stem>.wav with a <stem>.f0.csv reference track (speech only).
// Files that fit none of these, or a half pair, are listed in `problems`.
Manifest discover_corpus(const std::filesystem::path& dir, std::vector<std::string>* problems);

struct PreprocessReport {
  Manifest manifest;
  std::vector<std::string> problems;
};

// Writes every discovered item to out_dir/<id>/ resampled to 16 kHz, with
// the EGG high-pass filtered iff `filter` and both signals peak-normalized.
// Steps the input manifest marks as done are skipped, so running on an
// already processed directory copies it unchanged. Failing items are
// reported and skipped.
PreprocessReport preprocess_corpus(const std::filesystem::path& in_dir,
                                   const std::filesystem::path& out_dir, bool filter);

// Loads every item with both speech and EGG, resampled to 16 kHz, carrying
// the manifest's processing flags. Throws DataError if there is none.
Corpus load_training_corpus(const std::filesystem::path& dir);

}  // namespace eggcodec

#endif  // EGGCODEC_CORPUS_H_
