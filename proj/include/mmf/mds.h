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

#include <string>
#include <vector>

#include "mmf/matrix.h"

namespace mmf {

enum class Category { kTextD, kCrossD, kImgD };
std::string to_string(Category c);
Category category_from_string(const std::string& s);

// Samples whose |z_i| + |z_t| falls below this are skipped for a feature.
inline constexpr double kMdsEpsilon = 1e-12;

struct DominanceScores {
  Vector r;                      // per feature, in [0, 1]
  std::vector<bool> live;        // false when every sample was skipped
  std::vector<std::size_t> m_used;
};

// R(k) = mean over contributing samples of |z_i(k)| / (|z_i(k)| + |z_t(k)|).
// Dead features get the sentinel 0.5.
DominanceScores modality_dominance_scores(const Matrix& z_img,
                                          const Matrix& z_txt);

struct MdsReport {
  Vector r;
  std::vector<Category> category;
  std::vector<bool> live;
  std::vector<std::size_t> m_used;
  double mu = 0.0;
  double sigma = 0.0;

  std::vector<std::size_t> features_in(Category c) const;  // live only
  std::string to_json() const;
  static MdsReport from_json(const std::string& text);
};

// mu and population sigma over live features; TextD below mu - sigma,
// ImgD above mu + sigma, everything else (bounds included, dead features
// too) CrossD.
MdsReport categorize_features(const Vector& r, const std::vector<bool>& live);
MdsReport categorize_features(const DominanceScores& scores);

struct HistogramRow {
  double bin_left;
  std::size_t text_d;
  std::size_t cross_d;
  std::size_t img_d;
};
// Live features binned over [0, 1]; R == 1 lands in the last bin.
std::vector<HistogramRow> mds_histogram(const MdsReport& report,
                                        std::size_t bins = 20);
std::string histogram_csv(const std::vector<HistogramRow>& rows);

}  // namespace mmf
