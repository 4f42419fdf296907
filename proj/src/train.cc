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

#include "mmf/train.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmf {

void TrainConfig::validate() const {
  if (steps < 1) throw UsageError("steps must be >= 1");
  if (batch_size < 2) throw UsageError("batch_size must be >= 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be positive and finite");
  }
  if (checkpoint_every < 1) throw UsageError("checkpoint_every must be >= 1");
}

std::string TrainHistory::loss_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (std::size_t i = 0; i < loss.size(); ++i) out << i << ',' << loss[i] << '\n';
  return out.str();
}

std::string TrainHistory::checkpoints_csv() const {
  std::ostringstream out;
  out << "step,active_dims_img,active_dims_txt\n";
  for (std::size_t i = 0; i < checkpoint_steps.size(); ++i) {
    out << checkpoint_steps[i] << ',' << active_dims_img[i] << ','
        << active_dims_txt[i] << '\n';
  }
  return out.str();
}

bool TrainHistory::record_checkpoint(std::size_t step, std::size_t img_active,
                                     std::size_t txt_active,
                                     const TrainConfig& cfg) {
  checkpoint_steps.push_back(step);
  active_dims_img.push_back(img_active);
  active_dims_txt.push_back(txt_active);
  const std::size_t w = cfg.plateau_window;
  const std::size_t c = checkpoint_steps.size();
  if (w == 0 || c <= w) return false;
  auto decrease = [&](const std::vector<std::size_t>& v) {
    long long old_v = static_cast<long long>(v[c - 1 - w]);
    long long new_v = static_cast<long long>(v[c - 1]);
    return old_v - new_v;
  };
  const auto tol = static_cast<long long>(cfg.plateau_tolerance);
  if (decrease(active_dims_img) <= tol && decrease(active_dims_txt) <= tol) {
    stopped_on_plateau = true;
    return true;
  }
  return false;
}

DataSplit split_for_training(std::size_t num_samples, std::uint64_t seed) {
  std::vector<std::size_t> idx(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  const std::size_t n_hold = num_samples / 10;
  DataSplit split;
  split.holdout.assign(idx.begin(), idx.begin() + n_hold);
  split.train.assign(idx.begin() + n_hold, idx.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.train.begin(), split.train.end());
  if (split.holdout.empty()) split.holdout = split.train;
  return split;
}

BatchSampler::BatchSampler(std::vector<std::size_t> pool, std::uint64_t seed)
    : pool_(std::move(pool)), rng_(seed) {
  if (pool_.empty()) throw UsageError("cannot sample batches from no rows");
  rng_.shuffle(std::span<std::size_t>(pool_));
}

std::vector<std::size_t> BatchSampler::next(std::size_t batch_size) {
  const std::size_t b = std::min(batch_size, pool_.size());
  std::vector<std::size_t> out;
  out.reserve(b);
  while (out.size() < b) {
    if (cursor_ == pool_.size()) {
      rng_.shuffle(std::span<std::size_t>(pool_));
      cursor_ = 0;
    }
    out.push_back(pool_[cursor_++]);
  }
  return out;
}

PairedEmbeddingDataset slice_dataset(const PairedEmbeddingDataset& ds,
                                     std::size_t begin, std::size_t end) {
  if (begin >= end || end > ds.num_samples()) {
    throw UsageError("invalid dataset slice");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = begin; i < end; ++i) rows.push_back(i);
  PairedEmbeddingDataset out;
  out.img = ds.img.gather_rows(rows);
  out.txt = ds.txt.gather_rows(rows);
  if (ds.eval_img) {
    out.eval_img = ds.eval_img->gather_rows(rows);
    out.eval_txt = ds.eval_txt->gather_rows(rows);
  }
  out.sample_ids.assign(ds.sample_ids.begin() + begin,
                        ds.sample_ids.begin() + end);
  if (ds.texts) {
    out.texts = std::vector<std::string>(ds.texts->begin() + begin,
                                         ds.texts->begin() + end);
  }
  return out;
}

std::size_t count_active_dims(const Matrix& latents, double threshold) {
  std::size_t active = 0;
  for (std::size_t c = 0; c < latents.cols(); ++c) {
    for (std::size_t r = 0; r < latents.rows(); ++r) {
      if (std::abs(latents(r, c)) > threshold) {
        ++active;
        break;
      }
    }
  }
  return active;
}

double nonzero_fraction(const Matrix& latents) {
  if (latents.empty()) return 0.0;
  std::size_t nz = 0;
  for (double v : latents.flat()) nz += (v != 0.0);
  return static_cast<double>(nz) / static_cast<double>(latents.size());
}

Vector pooled_mean(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("pooled_mean width mismatch");
  Vector mean(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) mean[c] += a(r, c);
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) mean[c] += b(r, c);
  const double n = static_cast<double>(a.rows() + b.rows());
  for (double& v : mean) v /= n;
  return mean;
}

}  // namespace mmf
