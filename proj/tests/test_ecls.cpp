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

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "loadsizer/dispatch.hpp"
#include "loadsizer/ecls.hpp"
#include "loadsizer/error.hpp"
#include "loadsizer/rng.hpp"
#include "loadsizer/timeseries.hpp"

using namespace loadsizer;
using namespace loadsizer::ecls;

namespace {

timeseries::SortedSeries sorted_of(std::vector<double> v) { return timeseries::sort_ascending(v, true); }

double residual(std::span<const double> points, const SwitchMatrix& u, std::span<const double> x_desc) {
  // x_desc is the reported non-increasing order, which is the column order.
  double r = 0.0;
  for (std::size_t row = 0; row < u.rows(); ++row) {
    double v = 0.0;
    for (std::size_t i = 0; i < u.n; ++i) v += u.at(row, i) * x_desc[i];
    r += (points[row] - v) * (points[row] - v);
  }
  return std::sqrt(r);
}

}  // namespace

TEST_SUITE("ecls") {

TEST_CASE("switch matrix layout") {
  const auto one = build_switch_matrix(1, 1);
  CHECK(one.rows() == 1);
  CHECK(one.at(0, 0) == 1.0);

  const auto two = build_switch_matrix(2, 1);
  REQUIRE(two.rows() == 3);
  CHECK(two.at(0, 0) == 0.0);
  CHECK(two.at(0, 1) == 1.0);
  CHECK(two.at(1, 0) == 1.0);
  CHECK(two.at(1, 1) == 0.0);
  CHECK(two.at(2, 0) == 1.0);
  CHECK(two.at(2, 1) == 1.0);

  const auto three = build_switch_matrix(3);
  CHECK(three.rows() == 140);
  for (std::size_t k = 1; k < three.codes.size(); ++k) CHECK(three.codes[k] > three.codes[k - 1]);
  CHECK_THROWS_AS(build_switch_matrix(0), DomainError);
  CHECK_THROWS_AS(build_switch_matrix(13), DomainError);
  CHECK_THROWS_AS(build_switch_matrix(2, 0), DomainError);
}

TEST_CASE("point selection") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto s = sorted_of(v);
  CHECK(select_points(s, 4) == std::vector<double>{25, 50, 75, 100});
  CHECK(select_points(s, 100) == v);
  CHECK_THROWS_AS(select_points(s, 101), DomainError);

  const auto year = timeseries::sort_ascending(
      timeseries::normalize(timeseries::load_series(LOADSIZER_DATA_DIR "/year_15min.csv", 0)), true);
  const auto p = select_points(year, 140);
  CHECK(p.size() == 140);
  CHECK(std::is_sorted(p.begin(), p.end()));
  CHECK(p.front() >= year.values.front());
  CHECK(p.back() == year.values.back());
}

TEST_CASE("hand-solved instance") {
  const std::vector<double> pts{0.2, 0.5, 0.9};
  const auto r = solve_ecls(pts, build_switch_matrix(2, 1), 0.8);
  REQUIRE(r.x.size() == 2);
  CHECK(std::abs(r.x[0] - 0.55) <= 1e-9);
  CHECK(std::abs(r.x[1] - 0.25) <= 1e-9);
  CHECK(r.x[0] + r.x[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.kkt_residual <= 1e-12);
  CHECK_FALSE(r.has_nonpositive);
  CHECK_THROWS_AS(solve_ecls(pts, build_switch_matrix(2, 1), 0.4), DomainError);
  CHECK_THROWS_AS(solve_ecls(pts, build_switch_matrix(2, 2), 0.8), DomainError);
}

TEST_CASE("constant points") {
  const std::vector<double> pts(20, 0.7);
  const auto r = solve_ecls(pts, build_switch_matrix(1), 0.7);
  CHECK(r.x[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.residual_norm <= 1e-12);
  CHECK(std::abs(r.lambda) <= 1e-12);
}

TEST_CASE("KKT residual, sum constraint and local optimality on random data") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t blocks = (std::size_t{1} << n) - 1;
    const std::size_t len = 1 + rng.below(200 / blocks);
    std::vector<double> pts(len * blocks);
    for (double& v : pts) v = rng.uniform(0.01, 1.0);
    std::sort(pts.begin(), pts.end());
    const double C = rng.uniform(0.5, 1.0);
    const auto u = build_switch_matrix(n, len);
    const auto r = solve_ecls(pts, u, C);
    CHECK(r.kkt_residual <= 1e-8);
    CHECK(std::accumulate(r.x.begin(), r.x.end(), 0.0) == doctest::Approx(C).epsilon(1e-10));
    CHECK(std::is_sorted(r.x.rbegin(), r.x.rend()));
    CHECK(residual(pts, u, r.x) == doctest::Approx(r.residual_norm).epsilon(1e-9).scale(1.0));
    // Moving along any direction with zero sum cannot lower the residual.
    for (int k = 0; k < 10 && n > 1; ++k) {
      std::vector<double> dir(n);
      for (double& v : dir) v = rng.uniform(-1.0, 1.0);
      const double mean = std::accumulate(dir.begin(), dir.end(), 0.0) / static_cast<double>(n);
      std::vector<double> y = r.x;
      for (std::size_t i = 0; i < n; ++i) y[i] += 1e-3 * (dir[i] - mean);
      CHECK(residual(pts, u, y) >= r.residual_norm - 1e-12);
    }
  }
}

TEST_CASE("the equality constraint can only cost") {
  Rng rng(3);
  std::vector<double> pts(60);
  for (double& v : pts) v = rng.uniform(0.05, 1.0);
  std::sort(pts.begin(), pts.end());
  const auto u = build_switch_matrix(2, 20);
  Eigen::MatrixXd U(60, 2);
  for (std::size_t r = 0; r < 60; ++r)
    for (std::size_t c = 0; c < 2; ++c) U(r, c) = u.at(r, c);
  const Eigen::VectorXd S = Eigen::Map<Eigen::VectorXd>(pts.data(), 60);
  const Eigen::VectorXd ls = U.colPivHouseholderQr().solve(S);
  const double free_res = (S - U * ls).norm();
  for (double C : {0.5, 0.7, 0.9, 1.0}) CHECK(solve_ecls(pts, u, C).residual_norm >= free_res - 1e-12);
}

TEST_CASE("line search over C") {
  // Half the time at 0.3, half at 0.9.
  std::vector<double> v(200, 0.3);
  std::fill(v.begin() + 100, v.end(), 0.9);
  const auto s = sorted_of(v);
  const auto best = line_search_C(s, 2);
  const auto single = line_search_C(s, 1);
  CHECK(best.solar_utilization > single.solar_utilization);
  CHECK(best.x[0] > best.x[1]);
  CHECK(best.x[0] + best.x[1] <= 0.9 + 1e-12);

  const auto table = sensitivity_table(s, 2, EclsOptions{42, 20});
  CHECK(table.size() == 42);
  CHECK(table.front().C == 0.5);
  CHECK(table.back().C == 1.0);
  const auto& top = table[best_row(table)];
  CHECK(top.C == line_search_C(s, 2, EclsOptions{42, 20}).C);
  for (const auto& row : table)
    CHECK(row.solar_utilization == doctest::Approx(dispatch::solar_utilization_sorted(s.values, row.x)));

  // Constant data: only C = 1 captures everything.
  const auto flat = sorted_of(std::vector<double>(40, 1.0));
  const auto f = line_search_C(flat, 1);
  CHECK(f.C == 1.0);
  CHECK(f.solar_utilization == doctest::Approx(1.0));
  CHECK_THROWS_AS(sensitivity_table(s, 2, EclsOptions{1, 20}), DomainError);
}

TEST_CASE("short series shrink the block") {
  const auto s = sorted_of({0.2, 0.4, 0.6, 0.8, 1.0, 0.9, 0.7});
  const auto r = line_search_C(s, 2);
  CHECK(r.x.size() == 2);
  CHECK_THROWS_AS(line_search_C(sorted_of({0.2, 0.4}), 2), DomainError);
}

TEST_CASE("year fixture structure") {
  const auto year = timeseries::sort_ascending(
      timeseries::normalize(timeseries::load_series(LOADSIZER_DATA_DIR "/year_15min.csv", 0)), true);
  const auto r = line_search_C(year, 2);
  CHECK(r.x[0] > 1.5 * r.x[1]);
  const auto table = sensitivity_table(year, 3);
  double lo = 1.0, hi = 0.0;
  for (const auto& row : table) lo = std::min(lo, row.solar_utilization), hi = std::max(hi, row.solar_utilization);
  CHECK(hi - lo >= 0.0);
  CHECK(hi == table[best_row(table)].solar_utilization);
}

}
