// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_INFERENCE_H_
#define EGGCODEC_INFERENCE_H_

#include "eggcodec/nn/model.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

inline constexpr int kInferenceWindow = kPipelineRate;  // 1 s

// Predicts the EGG for a speech signal of any length >= 1 s. The signal is
// resampled to the pipeline rate and peak-normalized, cut into 1 s windows
// with 50% overlap (the last window is aligned to the end), and the window
// outputs are overlap-added with triangular weights min(n + 1, L - n). The
// result is returned at the input rate and length. Throws DataError for
// shorter input.
SignalBuffer reconstruct_egg(const nn::Model& model, const SignalBuffer& speech);

}  // namespace eggcodec

#endif  // EGGCODEC_INFERENCE_H_
