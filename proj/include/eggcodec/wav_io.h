// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_WAV_IO_H_
#define EGGCODEC_WAV_IO_H_

#include <filesystem>

#include "eggcodec/errors.h"
#include "eggcodec/signal_buffer.h"

namespace eggcodec {

class WavError : public DataError {
 public:
  using DataError::DataError;
};

class WavMissingFileError : public WavError {
 public:
  using WavError::WavError;
};

// Anything other than 16-bit integer or 32-bit float PCM, or a broken
// RIFF/WAVE container.
class WavUnsupportedEncodingError : public WavError {
 public:
  using WavError::WavError;
};

class WavMultiChannelError : public WavError {
 public:
  using WavError::WavError;
};

class WavWriteError : public WavError {
 public:
  using WavError::WavError;
};

// Reads a mono RIFF/WAVE file. PCM16 samples are scaled by 1/32768, float32
// samples are taken verbatim.
SignalBuffer load_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1] before quantization
// (round(x * 32768), saturated to the int16 range).
void save_wav(const SignalBuffer& sig, const std::filesystem::path& path);

}  // namespace eggcodec

#endif  // EGGCODEC_WAV_IO_H_
