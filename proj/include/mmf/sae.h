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
#include <vector>

#include "mmf/tensorio.h"
#include "mmf/train.h"

namespace mmf {

// Shared TopK sparse autoencoder for both modalities:
//   latent = TopK(ReLU(W_enc (z - b_pre))),  z_hat = W_dec latent + b_pre
struct SaeModel {
  Matrix w_enc;  // n x d
  Matrix w_dec;  // d x n
  Vector b_pre;  // d
  std::size_t k = 32;

  std::size_t latent_dim() const { return w_enc.rows(); }
  std::size_t input_dim() const { return w_enc.cols(); }
  void validate() const;
};

inline constexpr std::size_t kDefaultTopK = 32;

// Positions of the k largest values, ordered by (value desc, index asc).
std::vector<std::size_t> topk_indices(std::span<const double> values,
                                      std::size_t k);

struct SaeActivation {
  Vector latent;                    // n, at most k nonzeros
  std::vector<std::size_t> support; // kept units with positive activation
};

SaeActivation sae_forward(const SaeModel& model, std::span<const double> z);
Vector sae_encode(const SaeModel& model, std::span<const double> z);
Vector sae_decode(const SaeModel& model, std::span<const double> latent);
Matrix sae_encode_rows(const SaeModel& model, const Matrix& z);

struct SaeGradients {
  Matrix w_enc;
  Matrix w_dec;
  Vector b_pre;
};

// Mean over the batch of ||z_i - z_i_hat||^2 + ||z_t - z_t_hat||^2.
double sae_loss(const SaeModel& model, const Matrix& img, const Matrix& txt);
// Same loss; fills `grads` with the gradient taken at the current TopK
// selection (kept units only, selection held constant).
double sae_loss_and_gradients(const SaeModel& model, const Matrix& img,
                              const Matrix& txt, SaeGradients& grads);

// W_enc ~ N(0, 1/d), W_dec = W_enc^T, b_pre = pooled mean of both modalities.
SaeModel sae_init(const Matrix& img, const Matrix& txt, std::size_t n,
                  std::size_t k, std::uint64_t seed);

std::pair<SaeModel, TrainHistory> sae_train(const PairedEmbeddingDataset& data,
                                            const TrainConfig& cfg,
                                            std::size_t k, std::size_t n);

struct LatentPartition {
  std::vector<std::size_t> live;
  std::vector<std::size_t> dead;
};
// A latent is dead iff it is zero for every sample of both modalities.
LatentPartition prune_dead_latents(const SaeModel& model,
                                   const PairedEmbeddingDataset& data);

// sqrt(sum ||z - z_hat||^2 / sum ||z||^2) over both modalities.
double relative_reconstruction_error(const SaeModel& model,
                                     const PairedEmbeddingDataset& data);

void save_sae_model(const SaeModel& model, const std::filesystem::path& dir);
SaeModel load_sae_model(const std::filesystem::path& dir);

}  // namespace mmf
