// Copyright 2026 The mmfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mmf {

// Error families map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage = 1,    // bad arguments, violated preconditions
  kData = 2,     // malformed files, shape/alignment/metadata problems
  kNumeric = 3,  // divergence, undefined scores
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class ConfigError : public UsageError {
 public:
  explicit ConfigError(const std::string& what)
      : UsageError("config error: " + what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorKind::kData, "shape error: " + what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kData, "format error: " + what) {}
};

class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& what)
      : Error(ErrorKind::kData, "truncation error: " + what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, "data error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what)
      : Error(ErrorKind::kData, "io error: " + what) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what)
      : Error(ErrorKind::kData, "alignment error: " + what) {}
};

class MetadataError : public Error {
 public:
  explicit MetadataError(const std::string& what)
      : Error(ErrorKind::kData, "metadata error: " + what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, "numeric failure: " + what) {}
};

// Raised when a score has no defined value (e.g. every similarity pair
// was excluded, or a category needed for a contrast is empty).
class UndefinedScoreError : public Error {
 public:
  explicit UndefinedScoreError(const std::string& what)
      : Error(ErrorKind::kNumeric, "undefined score: " + what) {}
};

}  // namespace mmf
