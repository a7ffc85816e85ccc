// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_CHECKPOINT_H_
#define EGGCODEC_NN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "eggcodec/errors.h"
#include "eggcodec/nn/model.h"

namespace eggcodec::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointVersionError : public DataError {
 public:
  using DataError::DataError;
};

// Little-endian layout: "EGGC", u32 version, the ModelConfig fields in
// declaration order (ints as i64, reals as f64, lists as an i64 count then
// the items), then tensors until end of file, each as u32 name length, name
// bytes, u32 rank, i64 dims, f64 values. Tensors are the model parameters
// followed by one "rvq.<stage>.codebook" per quantizer stage and a
// one-element "rvq.initialized" flag.
void write_checkpoint(const Model& model, std::ostream& out);
void save_checkpoint(const Model& model, const std::filesystem::path& path);

// Throws CheckpointVersionError for another format version and DataError for
// anything else that does not match the layout or the model it describes.
Model read_checkpoint(std::istream& in, const std::string& source = "<stream>");
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_CHECKPOINT_H_
