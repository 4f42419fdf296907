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

#include "mmf/mono.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "mmf/kernels.h"
#include "mmf/rng.h"

namespace mmf {
namespace {

void check_pair(const Matrix& z_pos, const Matrix& z_neg) {
  if (z_pos.rows() != z_neg.rows() || z_pos.cols() != z_neg.cols()) {
    throw ShapeError("Z+ and Z- must have the same shape");
  }
  if (z_pos.rows() < 2) throw UsageError("similarity scores need m >= 2");
}

Matrix gram(const Matrix& z) {
  Matrix n = normalize_rows(z);
  Matrix s(n.rows(), n.rows());
  for (std::size_t i = 0; i < n.rows(); ++i)
    for (std::size_t j = 0; j < n.rows(); ++j)
      s(i, j) = kernels::dot(n.row(i), n.row(j));
  return s;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

std::vector<std::size_t> top_activated(const Matrix& latents,
                                       std::size_t feature, std::size_t m) {
  if (feature >= latents.cols()) throw UsageError("feature index out of range");
  if (m > latents.rows()) {
    throw UsageError("m=" + std::to_string(m) + " exceeds sample count " +
                     std::to_string(latents.rows()));
  }
  std::vector<std::size_t> idx(latents.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + m, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      double va = latents(a, feature);
                      double vb = latents(b, feature);
                      if (va != vb) return va > vb;
                      return a < b;
                    });
  idx.resize(m);
  return idx;
}

Matrix normalize_rows(const Matrix& z) {
  Matrix out = z;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = std::sqrt(kernels::dot(row, row));
    if (!(norm > 0.0)) {
      throw DataError("cannot normalize zero-norm row " + std::to_string(r));
    }
    for (double& v : row) v /= norm;
  }
  return out;
}

EmbSimResult embsim_detail(const Matrix& z_pos, const Matrix& z_neg) {
  check_pair(z_pos, z_neg);
  Matrix sp = gram(z_pos);
  Matrix sn = gram(z_neg);
  EmbSimResult res{0.0, 0, 0};
  double sum = 0.0;
  for (std::size_t i = 0; i < sp.rows(); ++i) {
    for (std::size_t j = 0; j < sp.rows(); ++j) {
      if (i == j) continue;
      if (std::abs(sn(i, j)) < kEmbSimEpsilon) {
        ++res.pairs_excluded;
        continue;
      }
      sum += (sp(i, j) - sn(i, j)) / sn(i, j);
      ++res.pairs_used;
    }
  }
  if (res.pairs_used == 0) {
    throw UndefinedScoreError("every EmbSim pair has a near-zero baseline");
  }
  res.value = sum / static_cast<double>(res.pairs_used);
  return res;
}

double embsim(const Matrix& z_pos, const Matrix& z_neg) {
  return embsim_detail(z_pos, z_neg).value;
}

double winrate(const Matrix& z_pos, const Matrix& z_neg) {
  check_pair(z_pos, z_neg);
  Matrix sp = gram(z_pos);
  Matrix sn = gram(z_neg);
  const std::size_t m = sp.rows();
  std::size_t wins = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && sp(i, j) > sn(i, j)) ++wins;
  return static_cast<double>(wins) / static_cast<double>(m * (m - 1));
}

std::vector<std::size_t> random_baseline_rows(std::uint64_t seed,
                                              std::size_t feature,
                                              int modality,
                                              std::size_t num_samples,
                                              std::size_t m) {
  Rng rng(derive_seed(seed, feature, static_cast<std::uint64_t>(modality)));
  return rng.sample_without_replacement(num_samples, m);
}

MonoReport mono_report(const Matrix& latents_img, const Matrix& latents_txt,
                       const Matrix& eval_img, const Matrix& eval_txt,
                       const MdsReport& categories, std::size_t m,
                       std::uint64_t seed) {
  const std::size_t n = latents_img.rows();
  if (latents_txt.rows() != n || eval_img.rows() != n || eval_txt.rows() != n) {
    throw AlignmentError("latents and eval embeddings must share rows");
  }
  if (latents_img.cols() != latents_txt.cols() ||
      categories.r.size() != latents_img.cols()) {
    throw ShapeError("latent widths and MDS report disagree");
  }
  if (m < 2) throw UsageError("m must be >= 2");
  if (m > n) throw UsageError("m exceeds the number of samples");

  MonoReport rep;
  rep.m = m;
  rep.seed = seed;
  std::vector<double> es_i, es_t, wr_i, wr_t, mo_i, mo_t;
  for (std::size_t k = 0; k < categories.r.size(); ++k) {
    if (!categories.live[k]) continue;
    FeatureMono f;
    f.feature = k;
    f.category = categories.category[k];
    auto score = [&](const Matrix& lat, const Matrix& eval, int modality,
                     std::optional<double>& es, double& wr,
                     std::optional<double>& mono) {
      Matrix pos = eval.gather_rows(top_activated(lat, k, m));
      Matrix neg = eval.gather_rows(random_baseline_rows(seed, k, modality, n, m));
      wr = winrate(pos, neg);
      try {
        es = embsim(pos, neg);
        mono = (*es + wr) / 2.0;
      } catch (const UndefinedScoreError&) {
        es.reset();
        mono.reset();
      }
    };
    score(latents_img, eval_img, 0, f.embsim_img, f.winrate_img, f.mono_img);
    score(latents_txt, eval_txt, 1, f.embsim_txt, f.winrate_txt, f.mono_txt);
    wr_i.push_back(f.winrate_img);
    wr_t.push_back(f.winrate_txt);
    if (f.embsim_img) es_i.push_back(*f.embsim_img), mo_i.push_back(*f.mono_img);
    if (f.embsim_txt) es_t.push_back(*f.embsim_txt), mo_t.push_back(*f.mono_txt);
    rep.features.push_back(f);
  }
  rep.mean_embsim_img = mean_of(es_i);
  rep.mean_embsim_txt = mean_of(es_t);
  rep.mean_winrate_img = mean_of(wr_i);
  rep.mean_winrate_txt = mean_of(wr_t);
  rep.mean_mono_img = mean_of(mo_i);
  rep.mean_mono_txt = mean_of(mo_t);

  auto category_mean = [&](Category c, bool img_side) {
    std::vector<double> v;
    for (const auto& f : rep.features) {
      const auto& mono = img_side ? f.mono_img : f.mono_txt;
      if (f.category == c && mono) v.push_back(*mono);
    }
    return mean_of(v);
  };
  auto contrast = [](std::optional<double> a, std::optional<double> b) {
    return (a && b) ? std::optional<double>(*a - *b) : std::nullopt;
  };
  rep.visual_mono = contrast(category_mean(Category::kImgD, true),
                             category_mean(Category::kTextD, true));
  rep.textual_mono = contrast(category_mean(Category::kTextD, false),
                              category_mean(Category::kImgD, false));
  return rep;
}

std::string MonoReport::to_json() const {
  nlohmann::json j;
  j["m"] = m;
  j["seed"] = seed;
  j["mean_embsim_img"] = opt(mean_embsim_img);
  j["mean_embsim_txt"] = opt(mean_embsim_txt);
  j["mean_winrate_img"] = opt(mean_winrate_img);
  j["mean_winrate_txt"] = opt(mean_winrate_txt);
  j["mean_mono_img"] = opt(mean_mono_img);
  j["mean_mono_txt"] = opt(mean_mono_txt);
  j["visual_mono"] = opt(visual_mono);
  j["textual_mono"] = opt(textual_mono);
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features) {
    feats.push_back({{"feature", f.feature},
                     {"category", to_string(f.category)},
                     {"embsim_img", opt(f.embsim_img)},
                     {"embsim_txt", opt(f.embsim_txt)},
                     {"winrate_img", f.winrate_img},
                     {"winrate_txt", f.winrate_txt},
                     {"mono_img", opt(f.mono_img)},
                     {"mono_txt", opt(f.mono_txt)}});
  }
  j["features"] = feats;
  return j.dump(1);
}

std::string feature_listing_jsonl(const PairedEmbeddingDataset& data,
                                  const Matrix& latents_img,
                                  const Matrix& latents_txt,
                                  std::size_t feature, std::size_t m) {
  std::string out;
  auto emit = [&](const Matrix& lat, const char* modality) {
    auto rows = top_activated(lat, feature, m);
    for (std::size_t rank = 0; rank < rows.size(); ++rank) {
      const std::size_t r = rows[rank];
      nlohmann::json j;
      j["feature"] = feature;
      j["modality"] = modality;
      j["rank"] = rank;
      j["sample_id"] = data.sample_ids[r];
      j["activation"] = lat(r, feature);
      j["text"] = data.texts ? nlohmann::json((*data.texts)[r]) : nlohmann::json();
      out += j.dump() + "\n";
    }
  };
  emit(latents_img, "img");
  emit(latents_txt, "txt");
  return out;
}

}  // namespace mmf
