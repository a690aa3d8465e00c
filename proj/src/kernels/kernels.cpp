// Copyright 2026 The loadsizer Authors
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
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>

#include "loadsizer/error.hpp"
#include "loadsizer/kernels.hpp"

namespace loadsizer::kernels {

#ifndef LOADSIZER_HAVE_AVX2
// Build without the AVX2 translation unit: keep the symbols so callers link,
// but they are never selected (backend_supported(avx2) is false).
namespace avx2 {
double sum(std::span<const double> x) { return scalar::sum(x); }
double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { scalar::axpy(alpha, x, y); }
std::size_t best_level(std::span<const double> levels, double cap) {
  return scalar::best_level(levels, cap);
}
}  // namespace avx2
#endif

namespace {

struct Table {
  Backend backend;
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  std::size_t (*best_level)(std::span<const double>, double);
};

constexpr Table kScalar{Backend::scalar, &scalar::sum, &scalar::dot, &scalar::axpy,
                        &scalar::best_level};
constexpr Table kAvx2{Backend::avx2, &avx2::sum, &avx2::dot, &avx2::axpy, &avx2::best_level};

bool cpu_has_avx2() {
#if defined(LOADSIZER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  if (const char* env = std::getenv("LOADSIZER_KERNELS")) {
    const std::string_view want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && cpu_has_avx2()) return &kAvx2;
  }
  return cpu_has_avx2() ? &kAvx2 : &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_supported(Backend b) {
  return b == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() { return current().load()->backend; }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw DomainError("kernel backend '" + std::string(backend_name(b)) +
                      "' is not supported on this machine");
  }
  current().store(b == Backend::avx2 ? &kAvx2 : &kScalar);
}

double sum(std::span<const double> x) { return current().load()->sum(x); }

double dot(std::span<const double> x, std::span<const double> y) {
  return current().load()->dot(x, y);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  current().load()->axpy(alpha, x, y);
}

std::size_t best_level(std::span<const double> levels, double cap) {
  return current().load()->best_level(levels, cap);
}

}  // namespace loadsizer::kernels
