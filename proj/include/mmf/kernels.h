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

#include <cstddef>
#include <span>
#include <string_view>

#include "mmf/matrix.h"

// Dense inner loops used by training and evaluation. Every kernel has a
// scalar reference implementation; wider variants (AVX2+FMA on x86-64,
// NEON on aarch64) are selected at runtime from CPU features and must
// agree with the reference to within reassociation error.
namespace mmf::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

std::string_view backend_name(Backend b);
bool backend_supported(Backend b);
// Best backend the running CPU supports.
Backend detect_backend();
Backend active_backend();
// Throws UsageError if the CPU (or build) lacks the backend.
void set_backend(Backend b);
const KernelTable& table_for(Backend b);

// RAII override, for equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : saved_(active_backend()) {
    set_backend(b);
  }
  ~ScopedBackend() { set_backend(saved_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend saved_;
};

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);

// y = A x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
// y += A^T x
void gemv_t_acc(const Matrix& a, std::span<const double> x,
                std::span<double> y);
// A += alpha * u v^T
void rank1_update(Matrix& a, double alpha, std::span<const double> u,
                  std::span<const double> v);

}  // namespace mmf::kernels
