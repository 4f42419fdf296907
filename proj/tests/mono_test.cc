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
#include "mmf/mono.h"
#include "oracles.h"

using namespace mmf;

namespace {

// m rows whose pairwise cosine is exactly `c`: sqrt(c) e0 + sqrt(1-c) e_{i+1}
Matrix constant_cosine(std::size_t m, double c) {
  Matrix z(m, m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    z(i, 0) = std::sqrt(c);
    z(i, i + 1) = std::sqrt(1.0 - c);
  }
  return z;
}

// Cluster-separated eval embeddings: one-hot cluster direction plus noise.
Matrix clustered_eval(const std::vector<std::size_t>& cluster, std::size_t k,
                      std::uint64_t seed) {
  Matrix noise = testing::random_matrix(cluster.size(), k, seed, -0.3, 0.3);
  for (std::size_t r = 0; r < cluster.size(); ++r) noise(r, cluster[r]) += 1.0;
  return noise;
}

MdsReport all_crossd(std::size_t d) {
  MdsReport rep;
  rep.r.assign(d, 0.5);
  rep.live.assign(d, true);
  rep.category.assign(d, Category::kCrossD);
  return rep;
}

}  // namespace

TEST_SUITE("monoeval") {

TEST_CASE("top_activated") {
  Matrix col(3, 1, {0.1, 0.9, 0.5});
  CHECK(top_activated(col, 0, 2) == std::vector<std::size_t>{1, 2});
  Matrix flat(4, 1, 0.7);
  CHECK(top_activated(flat, 0, 2) == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(top_activated(col, 0, 4), UsageError);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Matrix r = testing::random_matrix(50, 3, s);
    for (double& v : r.flat()) v = std::round(v * 4) / 4;  // force ties
    CHECK(top_activated(r, 1, 12) == testing::sort_top(r.column(1), 12));
  }
}

TEST_CASE("embsim") {
  SUBCASE("S+ = 0.8, S- = 0.4 everywhere gives 1") {
    CHECK(embsim(constant_cosine(5, 0.8), constant_cosine(5, 0.4)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("identical inputs give 0") {
    Matrix z = testing::random_matrix(6, 4, 1);
    CHECK(embsim(z, z) == 0.0);
  }
  SUBCASE("can be negative") {
    CHECK(embsim(constant_cosine(4, 0.2), constant_cosine(4, 0.6)) < 0.0);
  }
  SUBCASE("near-zero baselines are excluded") {
    // Orthogonal baseline: every S- is 0.
    CHECK_THROWS_AS(embsim(constant_cosine(3, 0.5), constant_cosine(3, 0.0)),
                    UndefinedScoreError);
    Matrix neg = constant_cosine(3, 0.5);
    neg(2, 0) = 0.0;  // row 2 now orthogonal to rows 0 and 1
    auto res = embsim_detail(constant_cosine(3, 0.5), neg);
    CHECK(res.pairs_used == 2);
    CHECK(res.pairs_excluded == 4);
  }
}

TEST_CASE("winrate") {
  SUBCASE("elementwise greater gives 1") {
    CHECK(winrate(constant_cosine(5, 0.9), constant_cosine(5, 0.3)) == 1.0);
  }
  SUBCASE("identical inputs give 0 (strict)") {
    Matrix z = testing::random_matrix(6, 4, 2);
    CHECK(winrate(z, z) == 0.0);
  }
  SUBCASE("m = 3 with 4 of 6 ordered pairs winning") {
    // S+: (0,1)=1, (0,2)=0, (1,2)=0.  S-: (0,1)=0.5, (0,2)=-0.5, (1,2)=0.5.
    Matrix pos(3, 3, {1, 0, 0, 1, 0, 0, 0, 1, 0});
    const double h = std::sqrt(0.75);
    Matrix neg(3, 3, {1, 0, 0, 0.5, h, 0, -0.5, h, 0});
    CHECK(winrate(pos, neg) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  }
  SUBCASE("invariant to common row permutation and positive row scaling") {
    Matrix pos = testing::random_matrix(8, 5, 3);
    Matrix neg = testing::random_matrix(8, 5, 4);
    std::vector<std::size_t> perm = {7, 2, 5, 0, 1, 6, 3, 4};
    CHECK(winrate(pos, neg) == winrate(pos.gather_rows(perm), neg.gather_rows(perm)));
    CHECK(embsim(pos, neg) ==
          doctest::Approx(embsim(pos.gather_rows(perm), neg.gather_rows(perm))).epsilon(1e-12));
    Matrix scaled = pos;
    for (std::size_t r = 0; r < 8; ++r)
      for (double& v : scaled.row(r)) v *= 0.5 + r;
    CHECK(winrate(scaled, neg) == winrate(pos, neg));
    CHECK(embsim(scaled, neg) == doctest::Approx(embsim(pos, neg)).epsilon(1e-12));
  }
  SUBCASE("zero rows cannot be normalized") {
    CHECK_THROWS_AS(winrate(Matrix(3, 2), Matrix(3, 2)), DataError);
  }
}

TEST_CASE("mono_report") {
  const std::size_t n = 320;
  std::vector<std::size_t> cluster(n);
  for (std::size_t r = 0; r < n; ++r) cluster[r] = r % 16;
  Matrix eval = clustered_eval(cluster, 16, 5);
  // Feature 0 fires only on cluster 3; feature 1 is noise.
  Matrix lat = testing::random_matrix(n, 2, 6, 0.0, 1.0);
  for (std::size_t r = 0; r < n; ++r) lat(r, 0) = cluster[r] == 3 ? 2.0 + lat(r, 0) : 0.0;
  MdsReport cats = all_crossd(2);
  cats.category[0] = Category::kImgD;
  cats.category[1] = Category::kTextD;

  auto rep = mono_report(lat, lat, eval, eval, cats, 20, 11);
  REQUIRE(rep.features.size() == 2);
  CHECK(rep.features[0].winrate_img > 0.9);
  for (const auto& f : rep.features) {
    CHECK(*f.mono_img == (*f.embsim_img + f.winrate_img) / 2.0);
    CHECK(*f.mono_txt == (*f.embsim_txt + f.winrate_txt) / 2.0);
    CHECK(f.winrate_img >= 0.0);
    CHECK(f.winrate_img <= 1.0);
  }
  REQUIRE(rep.visual_mono.has_value());
  CHECK(*rep.visual_mono == doctest::Approx(*rep.features[0].mono_img - *rep.features[1].mono_img));
  CHECK(*rep.textual_mono == doctest::Approx(*rep.features[1].mono_txt - *rep.features[0].mono_txt));

  SUBCASE("same seed is identical") {
    CHECK(mono_report(lat, lat, eval, eval, cats, 20, 11).to_json() == rep.to_json());
  }
  SUBCASE("empty category leaves the contrast undefined") {
    MdsReport only_cross = all_crossd(2);
    auto r2 = mono_report(lat, lat, eval, eval, only_cross, 20, 11);
    CHECK(!r2.visual_mono.has_value());
    CHECK(!r2.textual_mono.has_value());
    CHECK(r2.to_json().find("\"visual_mono\": null") != std::string::npos);
  }
  SUBCASE("dead features are skipped") {
    MdsReport c2 = cats;
    c2.live[1] = false;
    CHECK(mono_report(lat, lat, eval, eval, c2, 20, 11).features.size() == 1);
  }
  SUBCASE("m larger than the sample count") {
    CHECK_THROWS_AS(mono_report(lat, lat, eval, eval, cats, n + 1, 1), UsageError);
  }
}

TEST_CASE("random baselines depend on (seed, feature, modality)") {
  auto a = random_baseline_rows(1, 0, 0, 100, 20);
  CHECK(a == random_baseline_rows(1, 0, 0, 100, 20));
  CHECK(a != random_baseline_rows(1, 1, 0, 100, 20));
  CHECK(a != random_baseline_rows(1, 0, 1, 100, 20));
  std::sort(a.begin(), a.end());
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
}

}  // TEST_SUITE
