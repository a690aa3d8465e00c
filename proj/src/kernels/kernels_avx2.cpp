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

// AVX2 variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless the CPU reports AVX2.

#include <immintrin.h>

#include <cstddef>
#include <limits>
#include <span>

#include "loadsizer/kernels.hpp"

namespace loadsizer::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

}  // namespace

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  if (i + 4 <= n) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += p[i];
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4), a1);
  }
  if (i + 4 <= n) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += px[i] * py[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
    _mm256_storeu_pd(py + i, r);
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

std::size_t best_level(std::span<const double> levels, double cap) {
  const std::size_t n = levels.size();
  const double* p = levels.data();
  const double neg_inf = -std::numeric_limits<double>::infinity();

  // Per-lane running maximum and the index where it was first seen. Indices
  // are carried as doubles; exact for any realistic level count.
  __m256d best_v = _mm256_set1_pd(neg_inf);
  __m256d best_i = _mm256_set1_pd(static_cast<double>(n));
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d step = _mm256_set1_pd(4.0);
  const __m256d vcap = _mm256_set1_pd(cap);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    const __m256d feasible = _mm256_cmp_pd(v, vcap, _CMP_LE_OQ);
    const __m256d better = _mm256_and_pd(feasible, _mm256_cmp_pd(v, best_v, _CMP_GT_OQ));
    best_v = _mm256_blendv_pd(best_v, v, better);
    best_i = _mm256_blendv_pd(best_i, idx, better);
    idx = _mm256_add_pd(idx, step);
  }

  alignas(32) double lane_v[4];
  alignas(32) double lane_i[4];
  _mm256_store_pd(lane_v, best_v);
  _mm256_store_pd(lane_i, best_i);

  double value = neg_inf;
  std::size_t best = n;
  for (int l = 0; l < 4; ++l) {
    const auto li = static_cast<std::size_t>(lane_i[l]);
    if (li == n) continue;
    if (lane_v[l] > value || (lane_v[l] == value && li < best)) {
      value = lane_v[l];
      best = li;
    }
  }
  for (; i < n; ++i) {
    if (p[i] <= cap && p[i] > value) {
      value = p[i];
      best = i;
    }
  }
  return best;
}

}  // namespace loadsizer::kernels::avx2
