// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/inference.h"

#include <algorithm>

#include "eggcodec/errors.h"
#include "eggcodec/preprocess.h"

namespace eggcodec {
namespace {

constexpr std::size_t kWindowsPerBatch = 4;

}  // namespace

SignalBuffer reconstruct_egg(const nn::Model& model, const SignalBuffer& speech) {
  validate(speech);
  SignalBuffer x = resample(speech, kPipelineRate);
  const std::size_t len = kInferenceWindow;
  if (x.size() < len) {
    throw DataError("reconstruct needs at least 1 s of speech, got " +
                    std::to_string(speech.duration_s()) + " s");
  }
  if (peak_abs(x.view()) > 0.0) x = peak_normalize(x);

  const std::size_t hop = len / 2;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= x.size(); s += hop) starts.push_back(s);
  if (starts.back() + len < x.size()) starts.push_back(x.size() - len);

  std::vector<double> acc(x.size(), 0.0), weight(x.size(), 0.0);
  for (std::size_t first = 0; first < starts.size(); first += kWindowsPerBatch) {
    const std::size_t count = std::min(kWindowsPerBatch, starts.size() - first);
    nn::Tensor batch({static_cast<int>(count), 1, static_cast<int>(len)});
    for (std::size_t b = 0; b < count; ++b) {
      std::copy_n(x.samples.begin() + starts[first + b], len, batch.item(static_cast<int>(b)));
    }
    const nn::Tensor y = model.infer(batch);
    for (std::size_t b = 0; b < count; ++b) {
      const double* yb = y.item(static_cast<int>(b));
      const std::size_t s = starts[first + b];
      for (std::size_t n = 0; n < len; ++n) {
        const double w = static_cast<double>(std::min(n + 1, len - n));
        acc[s + n] += w * yb[n];
        weight[s + n] += w;
      }
    }
  }
  SignalBuffer out{std::vector<double>(x.size()), kPipelineRate};
  for (std::size_t i = 0; i < x.size(); ++i) out.samples[i] = acc[i] / weight[i];
  if (speech.sample_rate_hz != kPipelineRate) {
    out = resample(out, speech.sample_rate_hz);
    out.samples.resize(speech.size(), 0.0);
  }
  return out;
}

}  // namespace eggcodec
