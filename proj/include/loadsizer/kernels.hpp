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

#pragma once

// Data-parallel inner loops shared by the solvers. Every entry point has a
// portable scalar reference implementation and, on x86-64 builds, an AVX2
// variant; the variant is chosen once at startup from CPUID and can be
// overridden with LOADSIZER_KERNELS=scalar|avx2 or set_backend().

#include <cstddef>
#include <span>
#include <string_view>

namespace loadsizer::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_supported(Backend b);
Backend active_backend();
// Throws DomainError when `b` is not supported on this CPU/build.
void set_backend(Backend b);

// Sum of all entries.
double sum(std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);

// y += alpha * x. Sizes must match.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Index of the largest entry with value <= cap. Among equal maxima the lowest
// index wins. Returns levels.size() if no entry is <= cap.
std::size_t best_level(std::span<const double> levels, double cap);

// Direct access to each implementation, used by the equivalence tests.
namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
std::size_t best_level(std::span<const double> levels, double cap);
}  // namespace scalar

namespace avx2 {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
std::size_t best_level(std::span<const double> levels, double cap);
}  // namespace avx2

}  // namespace loadsizer::kernels
