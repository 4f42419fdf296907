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
#include "mmf/intervene.h"
#include "oracles.h"

using namespace mmf;

namespace {

MdsReport report_with(const std::vector<Category>& cats) {
  MdsReport rep;
  rep.category = cats;
  rep.live.assign(cats.size(), true);
  rep.r.assign(cats.size(), 0.5);
  return rep;
}

double l2(const Vector& a, const Vector& b, const IndexSet& set) {
  double s = 0.0;
  for (std::size_t i : set.indices) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("intervene") {

TEST_CASE("index sets") {
  auto s = IndexSet::make({5, 1, 3}, "ImgD", 6);
  CHECK(s.indices == std::vector<std::size_t>{1, 3, 5});
  CHECK(IndexSet::from_json(s.to_json(), 6).indices == s.indices);
  CHECK(IndexSet::from_json(s.to_json(), 6).label == "ImgD");
  CHECK_THROWS_AS(IndexSet::make({1, 1}, "ImgD", 6), UsageError);
  CHECK_THROWS_AS(IndexSet::make({6}, "ImgD", 6), UsageError);
  CHECK_THROWS_AS(IndexSet::make({0}, "Other", 6), UsageError);
  CHECK_THROWS_AS(IndexSet::from_json("{\"indices\": [", 6), FormatError);
}

TEST_CASE("zero_mask") {
  Vector z = {1, 2, 3, 4};
  auto set = IndexSet::make({1, 3}, "Random", 4);
  CHECK(zero_mask(z, set) == Vector{1, 0, 3, 0});
  CHECK(zero_mask(z, IndexSet::make({}, "Random", 4)) == z);
  CHECK(zero_mask(zero_mask(z, set), set) == zero_mask(z, set));
  CHECK_THROWS_AS(zero_mask(Vector{1, 2}, set), UsageError);
}

TEST_CASE("balanced_masks") {
  using C = Category;
  auto rep = report_with({C::kImgD, C::kImgD, C::kImgD, C::kTextD, C::kTextD,
                          C::kCrossD, C::kCrossD, C::kImgD});
  auto m = balanced_masks(rep, 3);
  CHECK(m.img.indices.size() == 2);
  CHECK(m.txt.indices == std::vector<std::size_t>{3, 4});
  CHECK(m.random.indices.size() == 2);
  for (std::size_t i : m.img.indices) CHECK(rep.category[i] == C::kImgD);
  CHECK(m.img.label == "ImgD");
  CHECK(m.txt.label == "TextD");
  CHECK(m.random.label == "Random");
  auto again = balanced_masks(rep, 3);
  CHECK(again.img.indices == m.img.indices);
  CHECK(again.random.indices == m.random.indices);

  SUBCASE("dead features never appear in the random draw") {
    rep.live[5] = rep.live[6] = false;
    for (std::uint64_t s = 0; s < 50; ++s)
      for (std::size_t i : balanced_masks(rep, s).random.indices) CHECK(rep.live[i]);
  }
  SUBCASE("empty category") {
    CHECK_THROWS_AS(balanced_masks(report_with({C::kImgD, C::kCrossD}), 0), UsageError);
  }
}

TEST_CASE("nearest_reference_classify") {
  ReferencePair refs{{1, 0}, "benign", {0, 1}, "harmful"};
  CHECK(nearest_reference_classify(Vector{2, 0.5}, refs) == "benign");
  CHECK(nearest_reference_classify(Vector{0.1, 3}, refs) == "harmful");
  CHECK(nearest_reference_classify(Vector{1, 1}, refs) == "benign");  // tie
  // Normalisation: magnitude of the reference does not matter.
  ReferencePair scaled{{100, 0}, "benign", {0, 0.01}, "harmful"};
  CHECK(nearest_reference_classify(Vector{0.4, 0.6}, scaled) == "harmful");
  CHECK_THROWS_AS(nearest_reference_classify(Vector{0, 0}, refs), DataError);
  CHECK_THROWS_AS(nearest_reference_classify(Vector{1, 2, 3}, refs), ShapeError);
}

TEST_CASE("align_detox") {
  Vector adv = testing::random_vector(10, 1);
  Vector ben = testing::random_vector(10, 2);
  auto set = IndexSet::make({0, 2, 4, 6}, "TextD", 10);

  auto res = align_detox(adv, ben, set, 25, 0.1);
  REQUIRE(res.loss_curve.size() == 26);
  CHECK(res.loss_curve.front() == doctest::Approx(l2(adv, ben, set)).epsilon(1e-15));
  for (std::size_t t = 1; t < res.loss_curve.size(); ++t) {
    CHECK(res.loss_curve[t] <= res.loss_curve[t - 1]);
    // Each step contracts the gap by exactly (1 - 2 lr).
    CHECK(res.loss_curve[t] == doctest::Approx(res.loss_curve[0] * std::pow(0.8, t)).epsilon(1e-9));
  }
  for (std::size_t i = 0; i < 10; ++i) {
    if (i % 2 == 1 || i > 6) CHECK(res.output[i] == adv[i]);
  }
  CHECK(align_detox(adv, ben, set, 0, 0.1).loss_curve.size() == 1);
  CHECK(align_detox(adv, ben, set, 1, 0.5).loss_curve.back() < 1e-15);
  CHECK_THROWS_AS(align_detox(adv, ben, set, 5, 1.0), UsageError);
  CHECK_THROWS_AS(align_detox(adv, ben, set, 5, 0.0), UsageError);
  CHECK_THROWS_AS(align_detox(adv, Vector(9), set, 5, 0.1), ShapeError);
}

TEST_CASE("interpolation") {
  Vector t = {1, 2, 3, 4};
  Vector r = {5, 6, 7, 8};
  auto set = IndexSet::make({0, 2}, "ImgD", 4);
  CHECK(interpolate_features(t, r, set, 1.0) == t);
  CHECK(interpolate_features(t, r, set, 0.0) == Vector{5, 2, 7, 4});
  CHECK(interpolate_features(t, r, set, 0.25) == Vector{4, 2, 6, 4});
  CHECK_THROWS_AS(interpolate_features(t, r, set, 1.5), UsageError);

  auto grid = default_alpha_grid();
  REQUIRE(grid.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(grid[i] == i / 10.0);
  auto rows = interpolation_sweep(t, r, set, grid);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(rows[i] == interpolate_features(t, r, set, grid[i]));
}

}  // TEST_SUITE
