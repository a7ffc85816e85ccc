// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/wav_io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace eggcodec {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

SignalBuffer load_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw WavMissingFileError("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavMissingFileError("cannot open: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());

  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavUnsupportedEncodingError("not a RIFF/WAVE container" + where);
  }

  Format fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || len > avail) {
        throw WavUnsupportedEncodingError("truncated fmt chunk" + where);
      }
      const std::uint8_t* f = bytes.data() + body;
      fmt.tag = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.rate = read_u32(f + 4);
      fmt.bits = read_u16(f + 14);
      if (fmt.tag == kFormatExtensible) {
        if (len < 40) {
          throw WavUnsupportedEncodingError("truncated extensible fmt" + where);
        }
        // The first two bytes of the sub-format GUID carry the format code.
        fmt.tag = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Writers that stream sometimes leave the length unset; clamp to file.
      data_len = std::min<std::size_t>(len, avail);
      have_data = true;
    }
    pos = body + len + (len & 1u);
  }

  if (!have_fmt || !have_data) {
    throw WavUnsupportedEncodingError("missing fmt or data chunk" + where);
  }
  if (fmt.channels != 1) {
    throw WavMultiChannelError(std::to_string(fmt.channels) +
                               " channels, only mono is supported" + where);
  }
  if (fmt.rate == 0) {
    throw WavUnsupportedEncodingError("zero sample rate" + where);
  }

  SignalBuffer sig;
  sig.sample_rate_hz = static_cast<int>(fmt.rate);
  if (fmt.tag == kFormatPcm && fmt.bits == 16) {
    const std::size_t n = data_len / 2;
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(read_u16(data + 2 * i));
      sig.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (fmt.tag == kFormatFloat && fmt.bits == 32) {
    const std::size_t n = data_len / 4;
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float v = std::bit_cast<float>(read_u32(data + 4 * i));
      if (!std::isfinite(v)) {
        throw WavUnsupportedEncodingError("non-finite float sample" + where);
      }
      sig.samples[i] = static_cast<double>(v);
    }
  } else {
    throw WavUnsupportedEncodingError(
        "unsupported encoding (format " + std::to_string(fmt.tag) + ", " +
        std::to_string(fmt.bits) + " bit)" + where);
  }
  return sig;
}

void save_wav(const SignalBuffer& sig, const std::filesystem::path& path) {
  validate(sig);
  const auto n = static_cast<std::uint32_t>(sig.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (double v : sig.samples) {
    const double q = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw WavWriteError("cannot write: " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw WavWriteError("write failed: " + path.string());
}

}  // namespace eggcodec
