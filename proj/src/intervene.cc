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

#include "mmf/intervene.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mmf/kernels.h"
#include "mmf/rng.h"

namespace mmf {
namespace {

void check_range(const IndexSet& set, std::size_t dim) {
  if (!set.indices.empty() && set.indices.back() >= dim) {
    throw UsageError("index " + std::to_string(set.indices.back()) +
                     " out of range for dimension " + std::to_string(dim));
  }
}

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw ShapeError("vectors differ in length");
}

Vector unit(std::span<const double> v) {
  const double norm = std::sqrt(kernels::dot(v, v));
  if (!(norm > 0.0)) throw DataError("cannot normalize a zero-norm vector");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double selected_distance(std::span<const double> a, std::span<const double> b,
                         const IndexSet& set) {
  double s = 0.0;
  for (std::size_t i : set.indices) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

IndexSet draw(const std::vector<std::size_t>& pool, std::size_t s,
              std::string label, Rng& rng, std::size_t dim) {
  std::vector<std::size_t> picked;
  if (s == pool.size()) {
    picked = pool;
  } else {
    for (std::size_t i : rng.sample_without_replacement(pool.size(), s))
      picked.push_back(pool[i]);
  }
  return IndexSet::make(std::move(picked), std::move(label), dim);
}

}  // namespace

IndexSet IndexSet::make(std::vector<std::size_t> indices, std::string label,
                        std::size_t dim) {
  std::sort(indices.begin(), indices.end());
  IndexSet s{std::move(indices), std::move(label)};
  s.validate(dim);
  return s;
}

void IndexSet::validate(std::size_t dim) const {
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (indices[i] <= indices[i - 1]) {
      throw UsageError("index set must be strictly increasing");
    }
  }
  check_range(*this, dim);
  if (label != "ImgD" && label != "TextD" && label != "CrossD" &&
      label != "Random") {
    throw UsageError("unknown index set label '" + label + "'");
  }
}

std::string IndexSet::to_json() const {
  nlohmann::json j;
  j["indices"] = indices;
  j["label"] = label;
  return j.dump();
}

IndexSet IndexSet::from_json(const std::string& text, std::size_t dim) {
  IndexSet s;
  try {
    auto j = nlohmann::json::parse(text);
    s.indices = j.at("indices").get<std::vector<std::size_t>>();
    s.label = j.value("label", std::string("Random"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("index set: " + std::string(e.what()));
  }
  s.validate(dim);
  return s;
}

Vector zero_mask(std::span<const double> z, const IndexSet& set) {
  check_range(set, z.size());
  Vector out(z.begin(), z.end());
  for (std::size_t i : set.indices) out[i] = 0.0;
  return out;
}

BalancedMasks balanced_masks(const MdsReport& report, std::uint64_t seed) {
  const auto img = report.features_in(Category::kImgD);
  const auto txt = report.features_in(Category::kTextD);
  if (img.empty() || txt.empty()) {
    throw UsageError("balanced masks need nonempty ImgD and TextD");
  }
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < report.live.size(); ++k)
    if (report.live[k]) live.push_back(k);
  const std::size_t s = std::min(img.size(), txt.size());
  const std::size_t dim = report.r.size();
  Rng rng(seed);
  BalancedMasks out;
  out.img = draw(img, s, "ImgD", rng, dim);
  out.txt = draw(txt, s, "TextD", rng, dim);
  out.random = draw(live, s, "Random", rng, dim);
  return out;
}

std::string nearest_reference_classify(std::span<const double> z,
                                       const ReferencePair& refs) {
  check_same_length(z.size(), refs.ref_a.size());
  check_same_length(z.size(), refs.ref_b.size());
  if (refs.label_a == refs.label_b) {
    throw UsageError("reference labels must differ");
  }
  Vector u = unit(z);
  const double da = kernels::squared_distance(u, unit(refs.ref_a));
  const double db = kernels::squared_distance(u, unit(refs.ref_b));
  return db < da ? refs.label_b : refs.label_a;
}

DetoxResult align_detox(std::span<const double> f_adv,
                        std::span<const double> f_ben, const IndexSet& set,
                        std::size_t steps, double lr) {
  check_same_length(f_adv.size(), f_ben.size());
  check_range(set, f_adv.size());
  if (!(lr > 0.0) || !(lr < 1.0)) {
    throw UsageError("align_detox needs 0 < lr < 1");
  }
  DetoxResult res;
  res.output.assign(f_adv.begin(), f_adv.end());
  res.loss_curve.reserve(steps + 1);
  res.loss_curve.push_back(selected_distance(res.output, f_ben, set));
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i : set.indices) {
      res.output[i] -= lr * 2.0 * (res.output[i] - f_ben[i]);
    }
    res.loss_curve.push_back(selected_distance(res.output, f_ben, set));
  }
  return res;
}

Vector interpolate_features(std::span<const double> t, std::span<const double> r,
                            const IndexSet& set, double alpha) {
  check_same_length(t.size(), r.size());
  check_range(set, t.size());
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError("alpha must lie in [0, 1]");
  }
  Vector out(t.begin(), t.end());
  for (std::size_t i : set.indices) {
    out[i] = alpha * t[i] + (1.0 - alpha) * r[i];
  }
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 7; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<Vector> interpolation_sweep(std::span<const double> t,
                                        std::span<const double> r,
                                        const IndexSet& set,
                                        const std::vector<double>& alphas) {
  std::vector<Vector> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(interpolate_features(t, r, set, a));
  return out;
}

}  // namespace mmf
