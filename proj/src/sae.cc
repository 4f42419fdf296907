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

#include "mmf/sae.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "json.hpp"
#include "mmf/kernels.h"

namespace mmf {
namespace {

namespace fs = std::filesystem;

void check_input(const SaeModel& model, std::span<const double> z) {
  if (z.size() != model.input_dim()) {
    throw ShapeError("SAE input has length " + std::to_string(z.size()) +
                     ", model expects " + std::to_string(model.input_dim()));
  }
}

void check_batch(const SaeModel& model, const Matrix& img, const Matrix& txt) {
  if (img.rows() == 0 || txt.rows() == 0) {
    throw UsageError("SAE loss needs a nonempty batch");
  }
  if (img.rows() != txt.rows()) {
    throw AlignmentError("img and txt batches differ in size");
  }
  if (img.cols() != model.input_dim() || txt.cols() != model.input_dim()) {
    throw ShapeError("batch width does not match SAE input dim");
  }
}

// Adds one sample's contribution; returns its squared residual.
double accumulate_sample(const SaeModel& model, std::span<const double> z,
                         double scale, SaeGradients* grads) {
  const std::size_t d = model.input_dim();
  SaeActivation act = sae_forward(model, z);
  Vector recon = sae_decode(model, act.latent);
  Vector resid(d);
  for (std::size_t i = 0; i < d; ++i) resid[i] = recon[i] - z[i];
  const double sq = kernels::dot(resid, resid);
  if (grads == nullptr) return sq;

  // d/dz_hat of scale*||z_hat - z||^2
  Vector g_out(d);
  for (std::size_t i = 0; i < d; ++i) g_out[i] = 2.0 * scale * resid[i];
  kernels::rank1_update(grads->w_dec, 1.0, g_out, act.latent);
  kernels::axpy(1.0, g_out, grads->b_pre);
  if (act.support.empty()) return sq;

  Vector g_latent(model.latent_dim(), 0.0);
  kernels::gemv_t_acc(model.w_dec, g_out, g_latent);
  Vector centered(d);
  for (std::size_t i = 0; i < d; ++i) centered[i] = z[i] - model.b_pre[i];
  for (std::size_t j : act.support) {
    kernels::axpy(g_latent[j], centered, grads->w_enc.row(j));
    kernels::axpy(-g_latent[j], model.w_enc.row(j), grads->b_pre);
  }
  return sq;
}

double batch_loss(const SaeModel& model, const Matrix& img, const Matrix& txt,
                  SaeGradients* grads) {
  check_batch(model, img, txt);
  const double scale = 1.0 / static_cast<double>(img.rows());
  double total = 0.0;
  for (std::size_t r = 0; r < img.rows(); ++r) {
    total += accumulate_sample(model, img.row(r), scale, grads);
    total += accumulate_sample(model, txt.row(r), scale, grads);
  }
  return total * scale;
}

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.flat()) {
    if (!std::isfinite(v)) throw DataError(std::string(what) + " is not finite");
  }
}

}  // namespace

void SaeModel::validate() const {
  const std::size_t n = w_enc.rows();
  const std::size_t d = w_enc.cols();
  if (n == 0 || d == 0) throw ShapeError("SAE has an empty encoder");
  if (w_dec.rows() != d || w_dec.cols() != n) {
    throw ShapeError("W_dec must be d x n");
  }
  if (b_pre.size() != d) throw ShapeError("b_pre must have length d");
  if (k < 1 || k > n) {
    throw UsageError("k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                     ", n=" + std::to_string(n) + ")");
  }
  check_finite(w_enc, "W_enc");
  check_finite(w_dec, "W_dec");
  for (double v : b_pre)
    if (!std::isfinite(v)) throw DataError("b_pre is not finite");
}

std::vector<std::size_t> topk_indices(std::span<const double> values,
                                      std::size_t k) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

SaeActivation sae_forward(const SaeModel& model, std::span<const double> z) {
  check_input(model, z);
  const std::size_t d = model.input_dim();
  Vector centered(d);
  for (std::size_t i = 0; i < d; ++i) centered[i] = z[i] - model.b_pre[i];
  Vector pre(model.latent_dim());
  kernels::gemv(model.w_enc, centered, pre);
  for (double& v : pre) v = std::max(v, 0.0);

  SaeActivation act;
  act.latent.assign(pre.size(), 0.0);
  for (std::size_t j : topk_indices(pre, model.k)) {
    if (pre[j] > 0.0) {
      act.latent[j] = pre[j];
      act.support.push_back(j);
    }
  }
  std::sort(act.support.begin(), act.support.end());
  return act;
}

Vector sae_encode(const SaeModel& model, std::span<const double> z) {
  return sae_forward(model, z).latent;
}

Vector sae_decode(const SaeModel& model, std::span<const double> latent) {
  if (latent.size() != model.latent_dim()) {
    throw ShapeError("SAE latent has length " + std::to_string(latent.size()) +
                     ", model expects " + std::to_string(model.latent_dim()));
  }
  Vector out(model.input_dim());
  kernels::gemv(model.w_dec, latent, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += model.b_pre[i];
  return out;
}

Matrix sae_encode_rows(const SaeModel& model, const Matrix& z) {
  Matrix out(z.rows(), model.latent_dim());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    Vector lat = sae_encode(model, z.row(r));
    std::copy(lat.begin(), lat.end(), out.row(r).begin());
  }
  return out;
}

double sae_loss(const SaeModel& model, const Matrix& img, const Matrix& txt) {
  return batch_loss(model, img, txt, nullptr);
}

double sae_loss_and_gradients(const SaeModel& model, const Matrix& img,
                              const Matrix& txt, SaeGradients& grads) {
  grads.w_enc = Matrix(model.w_enc.rows(), model.w_enc.cols());
  grads.w_dec = Matrix(model.w_dec.rows(), model.w_dec.cols());
  grads.b_pre.assign(model.b_pre.size(), 0.0);
  return batch_loss(model, img, txt, &grads);
}

SaeModel sae_init(const Matrix& img, const Matrix& txt, std::size_t n,
                  std::size_t k, std::uint64_t seed) {
  const std::size_t d = img.cols();
  if (n < 1) throw UsageError("latent dim must be >= 1");
  if (k < 1 || k > n) throw UsageError("k must satisfy 1 <= k <= n");
  SaeModel model;
  model.k = k;
  model.w_enc = Matrix(n, d);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : model.w_enc.flat()) v = scale * rng.normal();
  model.w_dec = model.w_enc.transposed();
  model.b_pre = pooled_mean(img, txt);
  return model;
}

std::pair<SaeModel, TrainHistory> sae_train(const PairedEmbeddingDataset& data,
                                            const TrainConfig& cfg,
                                            std::size_t k, std::size_t n) {
  cfg.validate();
  validate_dataset(data);
  if (k < 1) throw UsageError("k must be >= 1");
  if (n < k) throw UsageError("latent dim n must be >= k");

  DataSplit split = split_for_training(data.num_samples(), derive_seed(cfg.seed, 1));
  Matrix train_img = data.img.gather_rows(split.train);
  Matrix train_txt = data.txt.gather_rows(split.train);
  Matrix hold_img = data.img.gather_rows(split.holdout);
  Matrix hold_txt = data.txt.gather_rows(split.holdout);

  SaeModel model = sae_init(train_img, train_txt, n, k, derive_seed(cfg.seed, 2));
  std::vector<std::size_t> rows(train_img.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  BatchSampler sampler(std::move(rows), derive_seed(cfg.seed, 3));

  TrainHistory history;
  auto checkpoint = [&](std::size_t step) {
    return history.record_checkpoint(
        step, count_active_dims(sae_encode_rows(model, hold_img)),
        count_active_dims(sae_encode_rows(model, hold_txt)), cfg);
  };
  checkpoint(0);

  SaeGradients grads;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto batch = sampler.next(cfg.batch_size);
    Matrix bi = train_img.gather_rows(batch);
    Matrix bt = train_txt.gather_rows(batch);
    double loss = sae_loss_and_gradients(model, bi, bt, grads);
    if (!std::isfinite(loss)) {
      throw NumericError("SAE loss is not finite at step " + std::to_string(step));
    }
    history.loss.push_back(loss);
    const double lr = cfg.learning_rate;
    kernels::axpy(-lr, grads.w_enc.flat(), model.w_enc.flat());
    kernels::axpy(-lr, grads.w_dec.flat(), model.w_dec.flat());
    kernels::axpy(-lr, grads.b_pre, model.b_pre);
    if ((step + 1) % cfg.checkpoint_every == 0 && checkpoint(step + 1)) break;
  }
  return {std::move(model), std::move(history)};
}

LatentPartition prune_dead_latents(const SaeModel& model,
                                   const PairedEmbeddingDataset& data) {
  std::vector<bool> alive(model.latent_dim(), false);
  for (const Matrix* z : {&data.img, &data.txt}) {
    for (std::size_t r = 0; r < z->rows(); ++r) {
      for (std::size_t j : sae_forward(model, z->row(r)).support) alive[j] = true;
    }
  }
  LatentPartition part;
  for (std::size_t j = 0; j < alive.size(); ++j) {
    (alive[j] ? part.live : part.dead).push_back(j);
  }
  return part;
}

double relative_reconstruction_error(const SaeModel& model,
                                     const PairedEmbeddingDataset& data) {
  double num = 0.0;
  double den = 0.0;
  for (const Matrix* z : {&data.img, &data.txt}) {
    for (std::size_t r = 0; r < z->rows(); ++r) {
      Vector recon = sae_decode(model, sae_encode(model, z->row(r)));
      num += kernels::squared_distance(recon, z->row(r));
      den += kernels::dot(z->row(r), z->row(r));
    }
  }
  if (den == 0.0) throw NumericError("reconstruction error of an all-zero dataset");
  return std::sqrt(num / den);
}

void save_sae_model(const SaeModel& model, const fs::path& dir) {
  model.validate();
  fs::create_directories(dir);
  write_tensor(model.w_enc, dir / "W_enc.mmtf");
  write_tensor(model.w_dec, dir / "W_dec.mmtf");
  write_vector(model.b_pre, dir / "b_pre.mmtf");
  nlohmann::json j;
  j["kind"] = "sae";
  j["version"] = 1;
  j["k"] = model.k;
  j["n"] = model.latent_dim();
  j["d"] = model.input_dim();
  write_text_file(dir / "model.json", j.dump(1) + "\n");
}

SaeModel load_sae_model(const fs::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(dir / "model.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model.json: " + std::string(e.what()));
  }
  if (j.value("kind", std::string("sae")) != "sae") {
    throw FormatError(dir.string() + " is not an SAE model");
  }
  SaeModel model;
  model.w_enc = read_tensor(dir / "W_enc.mmtf");
  model.w_dec = read_tensor(dir / "W_dec.mmtf");
  model.b_pre = read_vector(dir / "b_pre.mmtf");
  try {
    model.k = j.at("k").get<std::size_t>();
    if (j.at("n").get<std::size_t>() != model.latent_dim() ||
        j.at("d").get<std::size_t>() != model.input_dim()) {
      throw ShapeError("model.json dims disagree with the stored tensors");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model.json: " + std::string(e.what()));
  }
  model.validate();
  return model;
}

}  // namespace mmf
