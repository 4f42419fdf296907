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

#include <filesystem>
#include <span>
#include <utility>

#include "mmf/tensorio.h"
#include "mmf/train.h"

namespace mmf {

// Non-negative two-layer projector g(z) = ReLU(W2 ReLU(W1 z + b1) + b2).
struct NclProjector {
  Matrix w1;  // d x d
  Vector b1;
  Matrix w2;  // d x d
  Vector b2;

  std::size_t dim() const { return w1.cols(); }
  void validate() const;
};

struct NclOptions {
  double temperature = 1.0;
  // Also average in the text-anchored direction.
  bool symmetric = false;
};

Vector ncl_project(const NclProjector& proj, std::span<const double> z);
Matrix ncl_project_rows(const NclProjector& proj, const Matrix& z);

struct NclGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

// Mean over image anchors b of
//   -log softmax_{b'}( g(z_i^b) . g(z_t^b') / tau )[b]
// with every text in the batch (the positive included) in the denominator.
double ncl_loss(const NclProjector& proj, const Matrix& img, const Matrix& txt,
                const NclOptions& opts = {});
double ncl_loss_and_gradients(const NclProjector& proj, const Matrix& img,
                              const Matrix& txt, const NclOptions& opts,
                              NclGradients& grads);

NclProjector ncl_init(std::size_t d, std::uint64_t seed);

std::pair<NclProjector, TrainHistory> ncl_train(
    const PairedEmbeddingDataset& data, const TrainConfig& cfg,
    const NclOptions& opts = {});

// Fraction of pairs whose positive score strictly beats every other text in
// its batch. Rows are chunked in order into batches of `batch_size`; a
// trailing chunk with fewer than two rows is ignored.
double in_batch_top1(const NclProjector& proj, const Matrix& img,
                     const Matrix& txt, std::size_t batch_size);

void save_ncl_projector(const NclProjector& proj,
                        const std::filesystem::path& dir);
NclProjector load_ncl_projector(const std::filesystem::path& dir);

}  // namespace mmf
