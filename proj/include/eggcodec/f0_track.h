// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_F0_TRACK_H_
#define EGGCODEC_F0_TRACK_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace eggcodec {

inline constexpr double kDefaultHop = 0.010;
inline constexpr double kMinF0 = 50.0;
inline constexpr double kMaxF0 = 600.0;
inline constexpr double kUnvoiced = 0.0;

// Frame-rate F0 sequence. Frame k is centred at k * hop_s; a value of
// kUnvoiced marks an unvoiced frame.
struct F0Track {
  double hop_s = kDefaultHop;
  std::vector<double> f0_hz;

  std::size_t size() const { return f0_hz.size(); }
  bool voiced(std::size_t k) const { return f0_hz[k] > 0.0; }
  double time_s(std::size_t k) const { return static_cast<double>(k) * hop_s; }

  friend bool operator==(const F0Track&, const F0Track&) = default;
};

// Frames covering a signal of the given duration: centres 0, hop, ... up to
// and including the last centre <= duration.
std::size_t frame_count(double duration_s, double hop_s);

// CSV with header `time_s,f0_hz,voiced`; unvoiced rows read `t,0.0,0`.
// Values are written with shortest round-trip formatting.
void write_f0_csv(const F0Track& track, std::ostream& out);
void write_f0_csv(const F0Track& track, const std::filesystem::path& path);

// Parses the same schema, including tracks produced by external pitch
// trackers. The hop is inferred from the first two rows (kDefaultHop for
// shorter files). Schema violations throw DataError naming the row.
F0Track read_f0_csv(std::istream& in, const std::string& source = "<stream>");
F0Track read_f0_csv(const std::filesystem::path& path);

}  // namespace eggcodec

#endif  // EGGCODEC_F0_TRACK_H_
