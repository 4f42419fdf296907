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
#include <vector>

#include "mmf/rng.h"
#include "mmf/tensorio.h"

namespace mmf {

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  // Stop once neither modality's active-dimension count fell by more than
  // plateau_tolerance over the last plateau_window checkpoints. 0 disables.
  std::size_t plateau_window = 0;
  std::size_t plateau_tolerance = 0;
  std::size_t checkpoint_every = 100;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> loss;  // one entry per executed step
  std::vector<std::size_t> checkpoint_steps;
  std::vector<std::size_t> active_dims_img;
  std::vector<std::size_t> active_dims_txt;
  bool stopped_on_plateau = false;

  // "step,loss" rows followed by nothing else; checkpoints go to their own
  // CSV so both stay rectangular.
  std::string loss_csv() const;
  std::string checkpoints_csv() const;
  // Records a checkpoint and reports whether the plateau rule fires.
  bool record_checkpoint(std::size_t step, std::size_t img_active,
                         std::size_t txt_active, const TrainConfig& cfg);
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

// Seeded 90/10 split. Datasets too small for a holdout reuse the training
// rows for checkpoint measurements.
DataSplit split_for_training(std::size_t num_samples, std::uint64_t seed);

// Epoch-wise reshuffled minibatches over a fixed index pool.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> pool, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t batch_size);

 private:
  std::vector<std::size_t> pool_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

PairedEmbeddingDataset slice_dataset(const PairedEmbeddingDataset& ds,
                                     std::size_t begin, std::size_t end);

// Columns with at least one |entry| > threshold.
std::size_t count_active_dims(const Matrix& latents, double threshold = 0.0);
// Fraction of entries that are nonzero.
double nonzero_fraction(const Matrix& latents);

// Mean over all rows of both matrices, as one d-vector.
Vector pooled_mean(const Matrix& a, const Matrix& b);

}  // namespace mmf
