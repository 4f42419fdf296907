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

#include <atomic>
#include <string>

#include "kernels_internal.h"

namespace mmf::kernels {
namespace {

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table_for(detect_backend())};
  return slot;
}

const KernelTable& active() {
  return *active_slot().load(std::memory_order_acquire);
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#ifdef MMF_HAVE_AVX2_KERNELS
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#ifdef MMF_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend detect_backend() {
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

const KernelTable& table_for(Backend b) {
  if (!backend_supported(b)) {
    throw UsageError("kernel backend not supported on this CPU: " +
                     std::string(backend_name(b)));
  }
  switch (b) {
#ifdef MMF_HAVE_AVX2_KERNELS
    case Backend::kAvx2:
      return detail::kAvx2Table;
#endif
#ifdef MMF_HAVE_NEON_KERNELS
    case Backend::kNeon:
      return detail::kNeonTable;
#endif
    default:
      return detail::kScalarTable;
  }
}

Backend active_backend() { return active().backend; }

void set_backend(Backend b) {
  active_slot().store(&table_for(b), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size(), "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a,
                        std::span<const double> b) {
  check_same_size(a.size(), b.size(), "squared_distance");
  return active().squared_distance(a.data(), b.data(), a.size());
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check_same_size(a.cols(), x.size(), "gemv input");
  check_same_size(a.rows(), y.size(), "gemv output");
  const KernelTable& t = active();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    y[r] = t.dot(a.row(r).data(), x.data(), x.size());
  }
}

void gemv_t_acc(const Matrix& a, std::span<const double> x,
                std::span<double> y) {
  check_same_size(a.rows(), x.size(), "gemv_t input");
  check_same_size(a.cols(), y.size(), "gemv_t output");
  const KernelTable& t = active();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r] != 0.0) t.axpy(x[r], a.row(r).data(), y.data(), y.size());
  }
}

void rank1_update(Matrix& a, double alpha, std::span<const double> u,
                  std::span<const double> v) {
  check_same_size(a.rows(), u.size(), "rank1 rows");
  check_same_size(a.cols(), v.size(), "rank1 cols");
  const KernelTable& t = active();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = alpha * u[r];
    if (s != 0.0) t.axpy(s, v.data(), a.row(r).data(), v.size());
  }
}

}  // namespace mmf::kernels
