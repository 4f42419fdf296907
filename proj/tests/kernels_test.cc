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
#include "mmf/kernels.h"
#include "oracles.h"

using namespace mmf;
using kernels::Backend;

namespace {

std::vector<Backend> wide_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::kAvx2, Backend::kNeon})
    if (kernels::backend_supported(b)) out.push_back(b);
  return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar backend is always available") {
  CHECK(kernels::backend_supported(Backend::kScalar));
  CHECK(kernels::table_for(Backend::kScalar).backend == Backend::kScalar);
  MESSAGE("active backend: " << kernels::backend_name(kernels::active_backend()));
}

TEST_CASE("wide kernels agree with the scalar reference on every tail length") {
  const auto& ref = kernels::table_for(Backend::kScalar);
  for (Backend b : wide_backends()) {
    const auto& t = kernels::table_for(b);
    for (std::size_t n = 0; n <= 67; ++n) {
      Vector a = testing::random_vector(n, 100 + n);
      Vector c = testing::random_vector(n, 200 + n);
      const double scale = 1.0 + n;
      CHECK(std::abs(t.dot(a.data(), c.data(), n) - ref.dot(a.data(), c.data(), n)) <=
            1e-13 * scale);
      CHECK(std::abs(t.squared_distance(a.data(), c.data(), n) -
                     ref.squared_distance(a.data(), c.data(), n)) <= 1e-13 * scale);
      Vector y1 = c, y2 = c;
      t.axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15);
    }
  }
}

TEST_CASE("dot matches the naive sum on integer-valued inputs exactly") {
  // Small integers: every partial sum is exact, so reassociation cannot matter.
  Vector a(37), b(37);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(i % 7) - 3.0;
    b[i] = static_cast<double>(i % 5) + 1.0;
  }
  double expect = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) expect += a[i] * b[i];
  for (Backend be : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
    if (!kernels::backend_supported(be)) continue;
    kernels::ScopedBackend scoped(be);
    CHECK(kernels::dot(a, b) == expect);
  }
}

TEST_CASE("gemv, gemv_t_acc and rank1_update match naive loops") {
  Matrix a = testing::random_matrix(7, 13, 5);
  Vector x = testing::random_vector(13, 6);
  Vector u = testing::random_vector(7, 7);
  for (Backend be : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
    if (!kernels::backend_supported(be)) continue;
    kernels::ScopedBackend scoped(be);
    Vector y(7);
    kernels::gemv(a, x, y);
    Vector expect = testing::naive_matvec(a, x);
    for (std::size_t i = 0; i < 7; ++i) CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-13));

    Vector yt(13, 1.0);
    kernels::gemv_t_acc(a, u, yt);
    Vector expect_t = testing::naive_matvec(a.transposed(), u);
    for (std::size_t i = 0; i < 13; ++i)
      CHECK(yt[i] == doctest::Approx(1.0 + expect_t[i]).epsilon(1e-13));

    Matrix m = a;
    kernels::rank1_update(m, 0.5, u, x);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 13; ++j)
        CHECK(m(i, j) == doctest::Approx(a(i, j) + 0.5 * u[i] * x[j]).epsilon(1e-13));
  }
}

TEST_CASE("length mismatch is a shape error") {
  Vector a(3), b(4);
  CHECK_THROWS_AS(kernels::dot(a, b), ShapeError);
  Matrix m(2, 3);
  Vector y(2);
  Vector x4(4);
  CHECK_THROWS_AS(kernels::gemv(m, x4, y), ShapeError);
}

}  // TEST_SUITE
