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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "loadsizer/kernels.hpp"
#include "loadsizer/rng.hpp"

using namespace loadsizer;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference values") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> y{2.0, 0.5, -1.0, 0.0, 1.0};
  CHECK(kernels::scalar::sum(x) == 15.0);
  CHECK(kernels::scalar::dot(x, y) == 5.0);
  std::vector<double> z = y;
  kernels::scalar::axpy(2.0, x, z);
  CHECK(z == std::vector<double>{4.0, 4.5, 5.0, 8.0, 11.0});
  CHECK(kernels::scalar::sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("best_level picks the first maximum under the cap") {
  const std::vector<double> levels{0.0, 0.3, 0.6, 0.3, 0.9, 0.6};
  CHECK(kernels::best_level(levels, 0.65) == 2);
  CHECK(kernels::best_level(levels, 0.3) == 1);
  CHECK(kernels::best_level(levels, 10.0) == 4);
  CHECK(kernels::best_level(levels, -0.1) == levels.size());
  CHECK(kernels::best_level(std::vector<double>{}, 1.0) == 0);
}

TEST_CASE("dispatch follows the requested backend") {
  const auto before = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  CHECK(kernels::backend_name(kernels::Backend::scalar) == "scalar");
  if (!kernels::backend_supported(kernels::Backend::avx2))
    CHECK_THROWS(kernels::set_backend(kernels::Backend::avx2));
  kernels::set_backend(before);
}

#ifdef LOADSIZER_HAVE_AVX2
TEST_CASE("avx2 matches scalar") {
  if (!kernels::backend_supported(kernels::Backend::avx2)) return;
  Rng rng(7);
  // Every length up to a few vector widths, to hit each tail case.
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    const double s = kernels::scalar::sum(x);
    CHECK(kernels::avx2::sum(x) == doctest::Approx(s).epsilon(1e-12).scale(1.0));
    CHECK(kernels::avx2::dot(x, y) == doctest::Approx(kernels::scalar::dot(x, y)).epsilon(1e-12).scale(1.0));

    auto a = y;
    auto b = y;
    kernels::scalar::axpy(0.37, x, a);
    kernels::avx2::axpy(0.37, x, b);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-15);

    // Levels on a coarse grid produce many exact ties.
    std::vector<double> levels(n);
    for (double& v : levels) v = std::round(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
    for (double cap : {-0.5, 0.0, 0.125, 0.5, 0.51, 0.999, 1.0, 2.0})
      CHECK(kernels::avx2::best_level(levels, cap) == kernels::scalar::best_level(levels, cap));
  }
}
#endif

}
