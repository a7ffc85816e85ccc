// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_ERRORS_H_
#define EGGCODEC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace eggcodec {

// Base of every domain error raised by the library. Contract violations on
// arguments (bad window length, mismatched shapes) use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration text that cannot be parsed or validated. `line` is 1-based,
// 0 when no position is known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}
  // Same error, prefixed with the file it came from.
  ConfigError(const std::string& source, const ConfigError& inner)
      : Error(source + ": " + inner.what()), line_(inner.line()) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Input data that is missing, malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

// A metric whose defining frame set is empty (e.g. MAE with no frames voiced
// in both tracks, PPMCC of a constant signal).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Inputs on which a loss is mathematically undefined (zero-norm cosine).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class NumericAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace eggcodec

#endif  // EGGCODEC_ERRORS_H_
