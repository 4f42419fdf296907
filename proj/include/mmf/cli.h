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

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mmf::cli {

// Flat key=value config text. '#' starts a comment, blank lines are
// ignored, dashes in keys are read as underscores. Malformed lines and
// repeated keys are ConfigErrors.
std::map<std::string, std::string> parse_config(const std::string& text);

// Merged view of one subcommand's settings: command-line flags first, then
// the config file. Getters validate type and range.
class Params {
 public:
  Params() = default;
  explicit Params(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  void set_default(const std::string& key, const std::string& value) {
    values_.emplace(key, value);
  }

  std::string str(const std::string& key) const;  // UsageError when missing
  std::optional<std::string> opt_str(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback,
                    std::size_t min = 0) const;
  std::uint64_t seed(std::uint64_t fallback = 0) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

// Runs one subcommand. Returns 0 on success, 1 on usage errors, 2 on
// data/format errors and 3 on numeric failures; the one-line JSON summary
// goes to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace mmf::cli
