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
#include "mmf/ncl.h"
#include "mmf/synthgen.h"
#include "oracles.h"

using namespace mmf;

namespace {

NclProjector identity_projector(std::size_t d) {
  NclProjector p;
  p.w1 = Matrix::identity(d);
  p.w2 = Matrix::identity(d);
  p.b1.assign(d, 0.0);
  p.b2.assign(d, 0.0);
  return p;
}

NclProjector random_projector(std::size_t d, std::uint64_t seed) {
  NclProjector p;
  p.w1 = testing::random_matrix(d, d, seed);
  p.w2 = testing::random_matrix(d, d, seed + 1);
  p.b1 = testing::random_vector(d, seed + 2, 0.0, 0.3);
  p.b2 = testing::random_vector(d, seed + 3, 0.0, 0.3);
  return p;
}

Vector relu(Vector v) {
  for (double& x : v) x = x > 0 ? x : 0;
  return v;
}

}  // namespace

TEST_SUITE("mncl") {

TEST_CASE("projection") {
  SUBCASE("identity on non-negative input") {
    Vector z = {0.0, 1.5, 2.0};
    CHECK(ncl_project(identity_projector(3), z) == z);
  }
  SUBCASE("large negative b2 saturates the outer ReLU") {
    auto p = random_projector(4, 3);
    p.b2.assign(4, -1e6);
    CHECK(ncl_project(p, testing::random_vector(4, 5)) == Vector(4, 0.0));
  }
  SUBCASE("matches a loop-evaluated composition, d = 3") {
    auto p = random_projector(3, 8);
    Vector z = testing::random_vector(3, 9);
    Vector h = testing::naive_matvec(p.w1, z);
    for (std::size_t i = 0; i < 3; ++i) h[i] += p.b1[i];
    h = relu(h);
    Vector o = testing::naive_matvec(p.w2, h);
    for (std::size_t i = 0; i < 3; ++i) o[i] += p.b2[i];
    o = relu(o);
    Vector got = ncl_project(p, z);
    for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(o[i]).epsilon(1e-14));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(ncl_project(identity_projector(3), Vector(2)), ShapeError);
  }
}

TEST_CASE("loss") {
  auto id = identity_projector(2);
  SUBCASE("indistinguishable positive and negative gives log 2") {
    // g(z_i^1).g(z_t^1) == g(z_i^1).g(z_t^2) and likewise for anchor 2.
    Matrix img(2, 2, {1, 0, 1, 0});
    Matrix txt(2, 2, {1, 1, 1, 1});
    CHECK(ncl_loss(id, img, txt) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("inner products {2,0;0,2} at tau = 1") {
    const double r2 = std::sqrt(2.0);
    Matrix img(2, 2, {r2, 0, 0, r2});
    Matrix txt(2, 2, {r2, 0, 0, r2});
    const double expect = -std::log(std::exp(2.0) / (std::exp(2.0) + 1.0));
    CHECK(expect == doctest::Approx(0.1269).epsilon(1e-3));
    CHECK(ncl_loss(id, img, txt) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("equal inner products give log B") {
    auto p3 = identity_projector(3);
    Matrix img(4, 3, 1.0);
    Matrix txt(4, 3, 0.5);
    CHECK(ncl_loss(p3, img, txt) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(ncl_loss(p3, img, txt) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  }
  SUBCASE("invariant to a common permutation of pairs") {
    auto p = random_projector(4, 2);
    Matrix img = testing::random_matrix(5, 4, 1);
    Matrix txt = testing::random_matrix(5, 4, 2);
    std::vector<std::size_t> perm = {3, 1, 4, 0, 2};
    CHECK(ncl_loss(p, img, txt) ==
          doctest::Approx(ncl_loss(p, img.gather_rows(perm), txt.gather_rows(perm)))
              .epsilon(1e-13));
  }
  SUBCASE("large logits do not overflow") {
    Matrix img(2, 2, {1000, 0, 0, 1000});
    Matrix txt(2, 2, {1000, 0, 0, 1000});
    CHECK(std::isfinite(ncl_loss(id, img, txt)));
  }
  SUBCASE("a single pair is a usage error") {
    CHECK_THROWS_AS(ncl_loss(id, Matrix(1, 2), Matrix(1, 2)), UsageError);
  }
}

TEST_CASE("analytic gradient matches central differences, d = 6, B = 4") {
  for (bool symmetric : {false, true}) {
    auto p = random_projector(6, 40);
    Matrix img = testing::random_matrix(4, 6, 41);
    Matrix txt = testing::random_matrix(4, 6, 42);
    NclOptions opts{0.7, symmetric};
    NclGradients g;
    ncl_loss_and_gradients(p, img, txt, opts, g);
    auto loss = [&] { return ncl_loss(p, img, txt, opts); };
    auto& w1 = const_cast<std::vector<double>&>(p.w1.data());
    auto& w2 = const_cast<std::vector<double>&>(p.w2.data());
    CHECK(testing::relative_error(g.w1.data(), testing::central_differences(w1, loss)) < 1e-4);
    CHECK(testing::relative_error(g.w2.data(), testing::central_differences(w2, loss)) < 1e-4);
    CHECK(testing::relative_error(g.b1, testing::central_differences(p.b1, loss)) < 1e-4);
    CHECK(testing::relative_error(g.b2, testing::central_differences(p.b2, loss)) < 1e-4);
  }
}

TEST_CASE("training") {
  SynthConfig cfg;
  cfg.num_samples = 200;
  cfg.dim = 12;
  cfg.n_img_only = 2;
  cfg.n_txt_only = 2;
  cfg.n_shared = 8;
  cfg.n_clusters = 8;
  cfg.shared_active = 2;
  cfg.noise_sigma = 0.01;
  cfg.mix = true;
  auto ds = generate_synthetic(cfg, 3).first;
  TrainConfig tc;
  tc.steps = 150;
  tc.batch_size = 16;
  tc.learning_rate = 0.05;
  tc.seed = 6;
  auto [a, ha] = ncl_train(ds, tc);
  auto [b, hb] = ncl_train(ds, tc);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b1 == b.b1);
  CHECK(a.b2 == b.b2);
  CHECK(ha.loss == hb.loss);
  Matrix proj = ncl_project_rows(a, ds.img);
  for (double v : proj.flat()) REQUIRE(v >= 0.0);
  CHECK(ha.loss.back() < ha.loss.front());

  SUBCASE("persistence round trip") {
    auto dir = testing::temp_dir("ncl_model");
    save_ncl_projector(a, dir);
    auto back = load_ncl_projector(dir);
    CHECK(back.w1 == a.w1);
    CHECK(back.b2 == a.b2);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("in_batch_top1 counts strict wins only") {
  auto id = identity_projector(2);
  Matrix img(4, 2, {1, 0, 0, 1, 1, 0, 0, 1});
  Matrix txt(4, 2, {1, 0, 0, 1, 1, 0, 0, 1});
  // Batches of 2: orthogonal pairs, every positive wins.
  CHECK(in_batch_top1(id, img, txt, 2) == 1.0);
  // One batch of 4: rows 0 and 2 tie, as do 1 and 3; no strict wins.
  CHECK(in_batch_top1(id, img, txt, 4) == 0.0);
}

}  // TEST_SUITE
