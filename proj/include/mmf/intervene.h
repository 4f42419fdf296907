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
#include <span>
#include <string>
#include <vector>

#include "mmf/mds.h"

namespace mmf {

struct IndexSet {
  std::vector<std::size_t> indices;  // strictly increasing
  std::string label = "Random";      // ImgD, TextD, CrossD or Random

  // Sorts and checks uniqueness and range against `dim`.
  static IndexSet make(std::vector<std::size_t> indices, std::string label,
                       std::size_t dim);
  void validate(std::size_t dim) const;
  std::string to_json() const;
  static IndexSet from_json(const std::string& text, std::size_t dim);
};

struct ReferencePair {
  Vector ref_a;
  std::string label_a;
  Vector ref_b;
  std::string label_b;
};

Vector zero_mask(std::span<const double> z, const IndexSet& set);

struct BalancedMasks {
  IndexSet img;
  IndexSet txt;
  IndexSet random;
};
// s = min(|ImgD|, |TextD|) draws from each category and s draws from all
// live features, seeded.
BalancedMasks balanced_masks(const MdsReport& report, std::uint64_t seed);

// Label of the reference nearer to z after L2-normalising all three;
// exact ties go to ref_a.
std::string nearest_reference_classify(std::span<const double> z,
                                       const ReferencePair& refs);

struct DetoxResult {
  Vector output;
  // ||F_adv[I] - F_ben[I]||_2 before the first step and after each step.
  std::vector<double> loss_curve;
};
// Gradient descent on ||F_adv[I] - F_ben[I]||^2 over the coordinates in I.
DetoxResult align_detox(std::span<const double> f_adv,
                        std::span<const double> f_ben, const IndexSet& set,
                        std::size_t steps, double lr);

// T'[i] = alpha T[i] + (1 - alpha) R[i] on I, T elsewhere.
Vector interpolate_features(std::span<const double> t, std::span<const double> r,
                            const IndexSet& set, double alpha);

// 0.0, 0.1, ..., 0.7
std::vector<double> default_alpha_grid();
std::vector<Vector> interpolation_sweep(std::span<const double> t,
                                        std::span<const double> r,
                                        const IndexSet& set,
                                        const std::vector<double>& alphas);

}  // namespace mmf
