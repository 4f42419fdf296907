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

#include <cmath>

#include "doctest.h"
#include "mmf/mds.h"
#include "mmf/synthgen.h"
#include "oracles.h"

using namespace mmf;

TEST_SUITE("mds") {

TEST_CASE("hand-evaluated dominance score") {
  // img [1, 3], txt [1, 1]: mean(1/2, 3/4) = 0.625
  Matrix img(2, 2, {1.0, 5.0, 3.0, 2.0});
  Matrix txt(2, 2, {1.0, 0.0, 1.0, 0.0});
  auto s = modality_dominance_scores(img, txt);
  CHECK(s.r[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s.r[1] == 1.0);
  CHECK(s.m_used[0] == 2);
}

TEST_CASE("absolute values and skipped samples") {
  Matrix img(3, 2, {-2.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  Matrix txt(3, 2, {2.0, 0.0, 0.0, 0.0, -3.0, 0.0});
  auto s = modality_dominance_scores(img, txt);
  CHECK(s.m_used[0] == 2);
  CHECK(s.r[0] == doctest::Approx((0.5 + 0.25) / 2).epsilon(1e-15));
  CHECK(!s.live[1]);
  CHECK(s.r[1] == 0.5);
}

TEST_CASE("swapping modalities maps R to 1 - R") {
  Matrix img = testing::random_matrix(50, 20, 1);
  Matrix txt = testing::random_matrix(50, 20, 2);
  auto a = modality_dominance_scores(img, txt);
  auto b = modality_dominance_scores(txt, img);
  for (std::size_t k = 0; k < 20; ++k) {
    REQUIRE(a.live[k]);
    CHECK(std::abs(a.r[k] - (1.0 - b.r[k])) < 1e-12);
  }
}

TEST_CASE("scale invariance and per-modality covariance") {
  Matrix img = testing::random_matrix(30, 10, 3);
  Matrix txt = testing::random_matrix(30, 10, 4);
  auto base = modality_dominance_scores(img, txt);
  Matrix img2 = img, txt2 = txt, img3 = img;
  for (std::size_t r = 0; r < 30; ++r) {
    // Powers of two keep the rescaling exact.
    const double c = std::ldexp(1.0, static_cast<int>(r % 5) - 2);
    for (std::size_t k = 0; k < 10; ++k) {
      img2(r, k) *= c;
      txt2(r, k) *= c;
      img3(r, k) *= 3.0;
    }
  }
  auto scaled = modality_dominance_scores(img2, txt2);
  auto boosted = modality_dominance_scores(img3, txt);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(scaled.r[k] == base.r[k]);
    CHECK(boosted.r[k] >= base.r[k]);
  }
}

TEST_CASE("shape and emptiness errors") {
  CHECK_THROWS_AS(modality_dominance_scores(Matrix(2, 3), Matrix(2, 4)), ShapeError);
  CHECK_THROWS_AS(modality_dominance_scores(Matrix(0, 3), Matrix(0, 3)), UsageError);
}

TEST_CASE("categorization with hand-computed population sigma") {
  Vector r = {0.1, 0.5, 0.5, 0.5, 0.9};
  auto rep = categorize_features(r, std::vector<bool>(5, true));
  // sigma = sqrt((0.16 + 0.16) / 5)
  CHECK(rep.mu == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.sigma == doctest::Approx(std::sqrt(0.064)).epsilon(1e-14));
  CHECK(rep.sigma == doctest::Approx(0.2530).epsilon(1e-3));
  std::vector<Category> expect = {Category::kTextD, Category::kCrossD,
                                  Category::kCrossD, Category::kCrossD,
                                  Category::kImgD};
  CHECK(rep.category == expect);
}

TEST_CASE("equal scores give sigma 0 and every feature CrossD") {
  for (double v : {0.1, 0.3, 0.7, 1.0 / 3.0}) {
    auto rep = categorize_features(Vector(7, v), std::vector<bool>(7, true));
    CHECK(rep.sigma == 0.0);
    for (auto c : rep.category) CHECK(c == Category::kCrossD);
  }
}

TEST_CASE("dead features are excluded from the moments") {
  Vector r = {0.0, 1.0, 0.5, 0.5};
  std::vector<bool> live = {true, true, false, false};
  auto rep = categorize_features(r, live);
  CHECK(rep.mu == 0.5);
  CHECK(rep.sigma == 0.5);
  CHECK(rep.category[2] == Category::kCrossD);
  CHECK(!rep.live[2]);
  // Boundary values sit in the closed middle band.
  CHECK(rep.category[0] == Category::kCrossD);
  CHECK(rep.category[1] == Category::kCrossD);
}

TEST_CASE("fewer than two live features is degenerate") {
  CHECK_THROWS_AS(categorize_features(Vector{0.2, 0.5}, {true, false}),
                  UndefinedScoreError);
}

TEST_CASE("category counts partition the features") {
  Vector r = testing::random_vector(40, 8, 0.0, 1.0);
  std::vector<bool> live(40, true);
  live[3] = live[17] = false;
  auto rep = categorize_features(r, live);
  std::size_t total = 0;
  for (auto c : {Category::kTextD, Category::kCrossD, Category::kImgD})
    total += rep.features_in(c).size();
  CHECK(total == 38);
  CHECK(rep.category.size() == 40);
}

TEST_CASE("planted labels are recovered on noise-free raw latents") {
  SynthConfig cfg;
  cfg.num_samples = 500;
  auto [ds, gt] = generate_synthetic(cfg, 17);
  auto rep = categorize_features(modality_dominance_scores(ds.img, ds.txt));
  for (std::size_t k = 0; k < cfg.dim; ++k) {
    if (gt.dim_modality[k] == DimModality::kImgOnly) CHECK(rep.category[k] == Category::kImgD);
    if (gt.dim_modality[k] == DimModality::kTxtOnly) CHECK(rep.category[k] == Category::kTextD);
    if (gt.dim_modality[k] == DimModality::kShared) CHECK(rep.category[k] == Category::kCrossD);
  }
}

TEST_CASE("report JSON and histogram") {
  Vector r = {0.1, 0.5, 0.5, 0.5, 0.9, 1.0};
  auto rep = categorize_features(r, std::vector<bool>(6, true));
  auto back = MdsReport::from_json(rep.to_json());
  CHECK(back.r == rep.r);
  CHECK(back.category == rep.category);
  CHECK(back.mu == rep.mu);
  auto rows = mds_histogram(rep, 10);
  REQUIRE(rows.size() == 10);
  CHECK(rows[1].text_d == 1);
  CHECK(rows[5].cross_d == 3);
  CHECK(rows[9].img_d == 2);  // 0.9 and the closed right edge 1.0
  CHECK(histogram_csv(rows).rfind("bin_left,count_TextD,count_CrossD,count_ImgD\n", 0) == 0);
}

}  // TEST_SUITE
