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

#include "mmf/synthgen.h"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "json.hpp"
#include "mmf/rng.h"

namespace mmf {

std::string to_string(DimModality m) {
  switch (m) {
    case DimModality::kImgOnly:
      return "img_only";
    case DimModality::kTxtOnly:
      return "txt_only";
    case DimModality::kShared:
      return "shared";
  }
  return "unknown";
}

void SynthConfig::validate() const {
  if (num_samples == 0) throw ConfigError("M must be positive");
  if (dim == 0) throw ConfigError("d must be positive");
  if (n_img_only + n_txt_only + n_shared != dim) {
    throw ConfigError("n_img_only + n_txt_only + n_shared must equal d");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("noise_sigma must be finite and >= 0");
  }
  if (n_clusters == 0) throw ConfigError("n_clusters must be >= 1");
  if (shared_active > n_shared) {
    throw ConfigError("shared_active exceeds n_shared");
  }
}

std::size_t SynthConfig::effective_shared_active() const {
  if (n_shared == 0) return 0;
  if (shared_active != 0) return shared_active;
  return (n_shared + n_clusters - 1) / n_clusters;
}

std::string GroundTruth::to_json() const {
  nlohmann::json j;
  std::vector<std::string> labels;
  for (auto m : dim_modality) labels.push_back(to_string(m));
  j["dim_modality"] = labels;
  j["cluster_of_sample"] = cluster_of_sample;
  if (!class_of_sample.empty()) j["class_of_sample"] = class_of_sample;
  j["cluster_support"] = cluster_support;
  return j.dump(1);
}

Matrix random_rotation(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign-fix so Q is unique given G (diag(R) > 0).
  const Eigen::MatrixXd& r = qr.matrixQR();
  Matrix out(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    double s = r(c, c) < 0 ? -1.0 : 1.0;
    for (std::size_t row = 0; row < d; ++row) out(row, c) = s * q(row, c);
  }
  return out;
}

std::pair<PairedEmbeddingDataset, GroundTruth> generate_synthetic(
    const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t m_count = cfg.num_samples;
  const std::size_t d = cfg.dim;
  const std::size_t shared_begin = cfg.n_img_only + cfg.n_txt_only;
  Rng rng(seed);

  GroundTruth gt;
  gt.dim_modality.resize(d, DimModality::kShared);
  for (std::size_t j = 0; j < cfg.n_img_only; ++j)
    gt.dim_modality[j] = DimModality::kImgOnly;
  for (std::size_t j = 0; j < cfg.n_txt_only; ++j)
    gt.dim_modality[cfg.n_img_only + j] = DimModality::kTxtOnly;

  const std::size_t support = cfg.effective_shared_active();
  gt.cluster_support.resize(cfg.n_clusters);
  for (auto& s : gt.cluster_support) {
    for (std::size_t j : rng.sample_without_replacement(cfg.n_shared, support))
      s.push_back(shared_begin + j);
    std::sort(s.begin(), s.end());
  }

  Matrix img(m_count, d);
  Matrix txt(m_count, d);
  gt.cluster_of_sample.resize(m_count);
  if (cfg.class_signal) gt.class_of_sample.resize(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t c = rng.below(cfg.n_clusters);
    gt.cluster_of_sample[m] = c;
    int y = 0;
    if (cfg.class_signal) {
      y = static_cast<int>(rng.below(2));
      gt.class_of_sample[m] = y;
    }
    for (std::size_t j = 0; j < cfg.n_img_only; ++j) {
      double v = rng.uniform(1.0, 2.0);
      if (cfg.class_signal && static_cast<int>(j % 2) == y) v += 2.0;
      img(m, j) = v;
    }
    for (std::size_t j = 0; j < cfg.n_txt_only; ++j) {
      txt(m, cfg.n_img_only + j) = rng.uniform(1.0, 2.0);
    }
    for (std::size_t j : gt.cluster_support[c]) {
      double v = rng.uniform(1.0, 2.0);
      img(m, j) = v;
      txt(m, j) = v;
    }
  }

  if (cfg.noise_sigma > 0.0) {
    for (double& v : img.flat()) v += cfg.noise_sigma * rng.normal();
    for (double& v : txt.flat()) v += cfg.noise_sigma * rng.normal();
  }

  PairedEmbeddingDataset ds;
  ds.eval_img = img;
  ds.eval_txt = txt;
  if (cfg.mix) {
    Matrix q = random_rotation(d, rng.next_u64());
    auto rotate = [&](const Matrix& z) {
      Matrix out(z.rows(), d);
      for (std::size_t r = 0; r < z.rows(); ++r)
        for (std::size_t i = 0; i < d; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < d; ++j) s += q(i, j) * z(r, j);
          out(r, i) = s;
        }
      return out;
    };
    ds.img = rotate(img);
    ds.txt = rotate(txt);
  } else {
    ds.img = std::move(img);
    ds.txt = std::move(txt);
  }

  ds.sample_ids.resize(m_count);
  std::vector<std::string> texts(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    ds.sample_ids[m] = static_cast<std::int64_t>(m);
    texts[m] = "cluster " + std::to_string(gt.cluster_of_sample[m]) +
               " sample " + std::to_string(m);
  }
  ds.texts = std::move(texts);
  return {std::move(ds), std::move(gt)};
}

}  // namespace mmf
