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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mmf/cli.h"
#include "mmf/errors.h"

namespace mmf::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    }
  }
  return out;
}

std::string Params::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing required option --" + key);
  return it->second;
}

std::optional<std::string> Params::opt_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::size_t Params::count(const std::string& key, std::size_t fallback,
                          std::size_t min) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.empty() && it->second[0] == '-') {
    throw ConfigError("'" + key + "' must be non-negative");
  }
  auto v = parse_number<std::size_t>(key, it->second);
  if (v < min) {
    throw UsageError("'" + key + "' must be >= " + std::to_string(min) +
                     ", got " + it->second);
  }
  return v;
}

std::uint64_t Params::seed(std::uint64_t fallback) const {
  auto it = values_.find("seed");
  if (it == values_.end()) return fallback;
  return parse_number<std::uint64_t>("seed", it->second);
}

double Params::real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = parse_number<double>(key, it->second);
  if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
  return v;
}

bool Params::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace mmf::cli
