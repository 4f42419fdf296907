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
#include <optional>
#include <string>
#include <vector>

#include "mmf/mds.h"
#include "mmf/tensorio.h"

namespace mmf {

inline constexpr std::size_t kDefaultTopM = 20;
// Off-diagonal baseline similarities with |S_-| below this are excluded
// from EmbSim.
inline constexpr double kEmbSimEpsilon = 1e-6;

// Row indices of the m largest entries of column `feature`, descending,
// ties to the lower row.
std::vector<std::size_t> top_activated(const Matrix& latents,
                                       std::size_t feature, std::size_t m);

// Rows scaled to unit L2 norm; a zero row is a DataError.
Matrix normalize_rows(const Matrix& z);

struct EmbSimResult {
  double value;
  std::size_t pairs_used;
  std::size_t pairs_excluded;
};

// Mean relative excess (S+ - S-) / S- over ordered off-diagonal pairs of the
// cosine-similarity matrices.
EmbSimResult embsim_detail(const Matrix& z_pos, const Matrix& z_neg);
double embsim(const Matrix& z_pos, const Matrix& z_neg);
// Fraction of ordered off-diagonal pairs with S+ > S- (strict).
double winrate(const Matrix& z_pos, const Matrix& z_neg);

struct FeatureMono {
  std::size_t feature;
  Category category;
  // Unset when every baseline pair was excluded.
  std::optional<double> embsim_img, embsim_txt;
  double winrate_img = 0.0, winrate_txt = 0.0;
  std::optional<double> mono_img, mono_txt;
};

struct MonoReport {
  std::vector<FeatureMono> features;  // live features only
  std::optional<double> mean_embsim_img, mean_embsim_txt;
  std::optional<double> mean_winrate_img, mean_winrate_txt;
  std::optional<double> mean_mono_img, mean_mono_txt;
  // Unset when a category needed for the contrast is empty.
  std::optional<double> visual_mono;
  std::optional<double> textual_mono;
  std::size_t m = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

// Scores every live feature in `categories`: top-m activated rows against m
// seeded random rows, per modality, using the eval embeddings.
MonoReport mono_report(const Matrix& latents_img, const Matrix& latents_txt,
                       const Matrix& eval_img, const Matrix& eval_txt,
                       const MdsReport& categories, std::size_t m,
                       std::uint64_t seed);

// Baseline rows drawn for (feature, modality); modality 0 = img, 1 = txt.
std::vector<std::size_t> random_baseline_rows(std::uint64_t seed,
                                              std::size_t feature,
                                              int modality,
                                              std::size_t num_samples,
                                              std::size_t m);

// Top-activated listing for one feature, one JSON object per line.
std::string feature_listing_jsonl(const PairedEmbeddingDataset& data,
                                  const Matrix& latents_img,
                                  const Matrix& latents_txt,
                                  std::size_t feature, std::size_t m);

}  // namespace mmf
