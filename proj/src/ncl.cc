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

#include "mmf/ncl.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "json.hpp"
#include "mmf/kernels.h"

namespace mmf {
namespace {

namespace fs = std::filesystem;

struct Forward {
  Vector hidden_pre;
  Vector hidden;
  Vector out_pre;
  Vector out;
};

Forward forward(const NclProjector& p, std::span<const double> z) {
  if (z.size() != p.dim()) {
    throw ShapeError("projector input has length " + std::to_string(z.size()) +
                     ", expects " + std::to_string(p.dim()));
  }
  const std::size_t d = p.dim();
  Forward f;
  f.hidden_pre.resize(d);
  kernels::gemv(p.w1, z, f.hidden_pre);
  f.hidden.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    f.hidden_pre[i] += p.b1[i];
    f.hidden[i] = f.hidden_pre[i] > 0.0 ? f.hidden_pre[i] : 0.0;
  }
  f.out_pre.resize(d);
  kernels::gemv(p.w2, f.hidden, f.out_pre);
  f.out.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    f.out_pre[i] += p.b2[i];
    f.out[i] = f.out_pre[i] > 0.0 ? f.out_pre[i] : 0.0;
  }
  return f;
}

// Backprop d(loss)/d(out) through one sample's forward pass.
void backward(const NclProjector& p, std::span<const double> z,
              const Forward& f, std::span<const double> g_out,
              NclGradients& g) {
  const std::size_t d = p.dim();
  Vector g_out_pre(d);
  for (std::size_t i = 0; i < d; ++i)
    g_out_pre[i] = f.out_pre[i] > 0.0 ? g_out[i] : 0.0;
  kernels::rank1_update(g.w2, 1.0, g_out_pre, f.hidden);
  kernels::axpy(1.0, g_out_pre, g.b2);
  Vector g_hidden(d, 0.0);
  kernels::gemv_t_acc(p.w2, g_out_pre, g_hidden);
  for (std::size_t i = 0; i < d; ++i)
    if (!(f.hidden_pre[i] > 0.0)) g_hidden[i] = 0.0;
  kernels::rank1_update(g.w1, 1.0, g_hidden, z);
  kernels::axpy(1.0, g_hidden, g.b1);
}

// Returns per-anchor -log softmax at the diagonal; fills `probs` with the
// row-wise softmax of `logits` (B x B).
double softmax_nll(const Matrix& logits, Matrix& probs) {
  const std::size_t b = logits.rows();
  probs = Matrix(b, b);
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < b; ++c) {
      probs(r, c) = std::exp(row[c] - mx);
      sum += probs(r, c);
    }
    for (std::size_t c = 0; c < b; ++c) probs(r, c) /= sum;
    total += (mx + std::log(sum)) - row[r];
  }
  return total;
}

double batch_loss(const NclProjector& p, const Matrix& img, const Matrix& txt,
                  const NclOptions& opts, NclGradients* grads) {
  const std::size_t b = img.rows();
  if (b < 2 || txt.rows() < 2) {
    throw UsageError("NCL loss needs at least 2 pairs for in-batch negatives");
  }
  if (txt.rows() != b) throw AlignmentError("img and txt batches differ in size");
  if (img.cols() != p.dim() || txt.cols() != p.dim()) {
    throw ShapeError("batch width does not match projector dim");
  }
  if (!(opts.temperature > 0.0)) throw UsageError("temperature must be positive");
  const double inv_tau = 1.0 / opts.temperature;

  std::vector<Forward> fi, ft;
  fi.reserve(b);
  ft.reserve(b);
  for (std::size_t r = 0; r < b; ++r) {
    fi.push_back(forward(p, img.row(r)));
    ft.push_back(forward(p, txt.row(r)));
  }
  Matrix logits(b, b);
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t c = 0; c < b; ++c)
      logits(r, c) = kernels::dot(fi[r].out, ft[c].out) * inv_tau;

  const double bd = static_cast<double>(b);
  Matrix probs;
  double loss = softmax_nll(logits, probs) / bd;
  // coef(r, c): d(loss)/d(logit(r, c))
  Matrix coef(b, b);
  const double dir_weight = opts.symmetric ? 0.5 : 1.0;
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t c = 0; c < b; ++c)
      coef(r, c) = dir_weight * (probs(r, c) - (r == c ? 1.0 : 0.0)) / bd;
  if (opts.symmetric) {
    Matrix probs_t;
    Matrix logits_t = logits.transposed();
    loss = 0.5 * (loss + softmax_nll(logits_t, probs_t) / bd);
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < b; ++c)
        coef(c, r) += 0.5 * (probs_t(r, c) - (r == c ? 1.0 : 0.0)) / bd;
  }
  if (grads == nullptr) return loss;

  const std::size_t d = p.dim();
  for (std::size_t r = 0; r < b; ++r) {
    Vector g_img(d, 0.0);
    Vector g_txt(d, 0.0);
    for (std::size_t c = 0; c < b; ++c) {
      kernels::axpy(coef(r, c) * inv_tau, ft[c].out, g_img);
      kernels::axpy(coef(c, r) * inv_tau, fi[c].out, g_txt);
    }
    backward(p, img.row(r), fi[r], g_img, *grads);
    backward(p, txt.row(r), ft[r], g_txt, *grads);
  }
  return loss;
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DataError(std::string(what) + " is not finite");
}

}  // namespace

void NclProjector::validate() const {
  const std::size_t d = w1.cols();
  if (d == 0) throw ShapeError("projector is empty");
  if (w1.rows() != d || w2.rows() != d || w2.cols() != d) {
    throw ShapeError("projector weights must be d x d");
  }
  if (b1.size() != d || b2.size() != d) {
    throw ShapeError("projector biases must have length d");
  }
  check_finite(w1.flat(), "W1");
  check_finite(w2.flat(), "W2");
  check_finite(b1, "b1");
  check_finite(b2, "b2");
}

Vector ncl_project(const NclProjector& proj, std::span<const double> z) {
  return forward(proj, z).out;
}

Matrix ncl_project_rows(const NclProjector& proj, const Matrix& z) {
  Matrix out(z.rows(), proj.dim());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    Vector v = ncl_project(proj, z.row(r));
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

double ncl_loss(const NclProjector& proj, const Matrix& img, const Matrix& txt,
                const NclOptions& opts) {
  return batch_loss(proj, img, txt, opts, nullptr);
}

double ncl_loss_and_gradients(const NclProjector& proj, const Matrix& img,
                              const Matrix& txt, const NclOptions& opts,
                              NclGradients& grads) {
  const std::size_t d = proj.dim();
  grads.w1 = Matrix(d, d);
  grads.w2 = Matrix(d, d);
  grads.b1.assign(d, 0.0);
  grads.b2.assign(d, 0.0);
  return batch_loss(proj, img, txt, opts, &grads);
}

NclProjector ncl_init(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw UsageError("projector dim must be positive");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  NclProjector p;
  p.w1 = Matrix(d, d);
  p.w2 = Matrix(d, d);
  for (double& v : p.w1.flat()) v = scale * rng.normal();
  for (double& v : p.w2.flat()) v = scale * rng.normal();
  p.b1.assign(d, 0.0);
  p.b2.assign(d, 0.0);
  return p;
}

std::pair<NclProjector, TrainHistory> ncl_train(
    const PairedEmbeddingDataset& data, const TrainConfig& cfg,
    const NclOptions& opts) {
  cfg.validate();
  validate_dataset(data);
  if (!(opts.temperature > 0.0)) throw UsageError("temperature must be positive");
  DataSplit split = split_for_training(data.num_samples(), derive_seed(cfg.seed, 1));
  if (split.train.size() < 2) throw UsageError("NCL needs at least 2 training pairs");
  Matrix train_img = data.img.gather_rows(split.train);
  Matrix train_txt = data.txt.gather_rows(split.train);
  Matrix hold_img = data.img.gather_rows(split.holdout);
  Matrix hold_txt = data.txt.gather_rows(split.holdout);

  NclProjector proj = ncl_init(data.dim(), derive_seed(cfg.seed, 2));
  std::vector<std::size_t> rows(train_img.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  BatchSampler sampler(std::move(rows), derive_seed(cfg.seed, 3));

  TrainHistory history;
  auto checkpoint = [&](std::size_t step) {
    return history.record_checkpoint(
        step, count_active_dims(ncl_project_rows(proj, hold_img)),
        count_active_dims(ncl_project_rows(proj, hold_txt)), cfg);
  };
  checkpoint(0);

  NclGradients grads;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto batch = sampler.next(cfg.batch_size);
    Matrix bi = train_img.gather_rows(batch);
    Matrix bt = train_txt.gather_rows(batch);
    double loss = ncl_loss_and_gradients(proj, bi, bt, opts, grads);
    if (!std::isfinite(loss)) {
      throw NumericError("NCL loss is not finite at step " + std::to_string(step));
    }
    history.loss.push_back(loss);
    const double lr = cfg.learning_rate;
    kernels::axpy(-lr, grads.w1.flat(), proj.w1.flat());
    kernels::axpy(-lr, grads.b1, proj.b1);
    kernels::axpy(-lr, grads.w2.flat(), proj.w2.flat());
    kernels::axpy(-lr, grads.b2, proj.b2);
    if ((step + 1) % cfg.checkpoint_every == 0 && checkpoint(step + 1)) break;
  }
  return {std::move(proj), std::move(history)};
}

double in_batch_top1(const NclProjector& proj, const Matrix& img,
                     const Matrix& txt, std::size_t batch_size) {
  if (img.rows() != txt.rows()) throw AlignmentError("img/txt row mismatch");
  if (batch_size < 2) throw UsageError("batch_size must be >= 2");
  Matrix pi = ncl_project_rows(proj, img);
  Matrix pt = ncl_project_rows(proj, txt);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t begin = 0; begin + 2 <= img.rows(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, img.rows());
    for (std::size_t r = begin; r < end; ++r) {
      const double pos = kernels::dot(pi.row(r), pt.row(r));
      bool win = true;
      for (std::size_t c = begin; c < end && win; ++c) {
        if (c != r && !(pos > kernels::dot(pi.row(r), pt.row(c)))) win = false;
      }
      hits += win;
      ++total;
    }
  }
  if (total == 0) throw UsageError("need at least 2 held-out pairs");
  return static_cast<double>(hits) / static_cast<double>(total);
}

void save_ncl_projector(const NclProjector& proj, const fs::path& dir) {
  proj.validate();
  fs::create_directories(dir);
  write_tensor(proj.w1, dir / "W1.mmtf");
  write_vector(proj.b1, dir / "b1.mmtf");
  write_tensor(proj.w2, dir / "W2.mmtf");
  write_vector(proj.b2, dir / "b2.mmtf");
  nlohmann::json j;
  j["kind"] = "ncl";
  j["version"] = 1;
  j["d"] = proj.dim();
  j["n"] = proj.dim();
  write_text_file(dir / "model.json", j.dump(1) + "\n");
}

NclProjector load_ncl_projector(const fs::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(dir / "model.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model.json: " + std::string(e.what()));
  }
  if (j.value("kind", std::string()) != "ncl") {
    throw FormatError(dir.string() + " is not an NCL projector");
  }
  NclProjector p;
  p.w1 = read_tensor(dir / "W1.mmtf");
  p.b1 = read_vector(dir / "b1.mmtf");
  p.w2 = read_tensor(dir / "W2.mmtf");
  p.b2 = read_vector(dir / "b2.mmtf");
  p.validate();
  return p;
}

}  // namespace mmf
