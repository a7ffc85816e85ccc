// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_TESTS_TEST_UTIL_H_
#define EGGCODEC_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eggcodec/signal_buffer.h"

namespace eggcodec::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "eggcodec_test";
    if (info != nullptr) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline SignalBuffer sine(double freq_hz, double seconds, int rate = kPipelineRate,
                         double amp = 0.5, double phase = 0.0) {
  SignalBuffer s;
  s.sample_rate_hz = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * i / rate + phase);
  }
  return s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace eggcodec::testing

#endif  // EGGCODEC_TESTS_TEST_UTIL_H_
