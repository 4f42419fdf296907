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
#include <string>
#include <utility>
#include <vector>

#include "mmf/tensorio.h"

namespace mmf {

enum class DimModality { kImgOnly, kTxtOnly, kShared };
std::string to_string(DimModality m);

struct SynthConfig {
  std::size_t num_samples = 2000;  // M
  std::size_t dim = 64;            // d
  std::size_t n_img_only = 10;
  std::size_t n_txt_only = 10;
  std::size_t n_shared = 44;
  double noise_sigma = 0.0;
  std::size_t n_clusters = 8;
  bool mix = false;
  // Shared dims active per cluster; 0 picks ceil(n_shared / n_clusters).
  std::size_t shared_active = 0;
  // Plants a binary class label in the image-only dims: for a sample of
  // class y, image-only dim j gets +2 when j % 2 == y.
  bool class_signal = false;

  void validate() const;
  std::size_t effective_shared_active() const;
};

struct GroundTruth {
  std::vector<DimModality> dim_modality;        // length d
  std::vector<std::size_t> cluster_of_sample;   // length M
  std::vector<int> class_of_sample;             // length M when class_signal
  std::vector<std::vector<std::size_t>> cluster_support;  // shared dim ids

  std::string to_json() const;
};

// Latents are built per sample: image-only dims uniform in [1, 2] in the
// image row and 0 in the text row (text-only symmetric); the sample's
// cluster support on the shared dims gets one uniform [1, 2] draw copied
// into both rows. Gaussian noise is then added everywhere, and with `mix`
// both matrices are multiplied by one seeded orthogonal rotation. The
// eval matrices hold the un-rotated (noisy) latents.
std::pair<PairedEmbeddingDataset, GroundTruth> generate_synthetic(
    const SynthConfig& cfg, std::uint64_t seed);

// Orthogonal d x d matrix from the QR factorisation of a Gaussian matrix.
Matrix random_rotation(std::size_t d, std::uint64_t seed);

}  // namespace mmf
