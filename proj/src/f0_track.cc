// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/f0_track.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "eggcodec/errors.h"

namespace eggcodec {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() ||
      !std::isfinite(v)) {
    throw DataError(where + ": not a number: '" + t + "'");
  }
  return v;
}

}  // namespace

std::size_t frame_count(double duration_s, double hop_s) {
  if (duration_s < 0.0) return 0;
  return static_cast<std::size_t>(std::floor(duration_s / hop_s + 1e-9)) + 1;
}

void write_f0_csv(const F0Track& track, std::ostream& out) {
  out << "time_s,f0_hz,voiced\n";
  for (std::size_t k = 0; k < track.size(); ++k) {
    const bool v = track.voiced(k);
    out << format_double(track.time_s(k)) << ','
        << (v ? format_double(track.f0_hz[k]) : std::string("0.0")) << ','
        << (v ? 1 : 0) << '\n';
  }
}

void write_f0_csv(const F0Track& track, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_f0_csv(track, out);
}

F0Track read_f0_csv(std::istream& in, const std::string& source) {
  std::string line;
  int row = 1;
  if (!std::getline(in, line) || trim(line) != "time_s,f0_hz,voiced") {
    throw DataError(source + " row 1: expected header 'time_s,f0_hz,voiced'");
  }
  F0Track track;
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::string where = source + " row " + std::to_string(row);
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, c, ',') || std::getline(ss, extra, ',')) {
      throw DataError(where + ": expected 3 columns");
    }
    const double t = parse_double(a, where);
    const double f0 = parse_double(b, where);
    const std::string flag = trim(c);
    if (flag != "0" && flag != "1") {
      throw DataError(where + ": voiced flag must be 0 or 1");
    }
    if (!times.empty() && t <= times.back()) {
      throw DataError(where + ": time_s must increase");
    }
    if (flag == "1" && !(f0 > 0.0)) {
      throw DataError(where + ": voiced frame needs f0_hz > 0");
    }
    times.push_back(t);
    track.f0_hz.push_back(flag == "1" ? f0 : kUnvoiced);
  }
  if (times.size() >= 2) track.hop_s = times[1] - times[0];
  return track;
}

F0Track read_f0_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_f0_csv(in, path.string());
}

}  // namespace eggcodec
