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
#include <limits>
#include <vector>

#include "loadsizer/dispatch.hpp"
#include "loadsizer/ecls.hpp"
#include "loadsizer/error.hpp"
#include "loadsizer/icls.hpp"
#include "loadsizer/rng.hpp"

using namespace loadsizer;
using namespace loadsizer::icls;

namespace {

timeseries::SortedSeries sorted_of(std::vector<double> v) { return timeseries::sort_ascending(v, true); }

SwitchTimes times(std::vector<std::size_t> m, std::size_t total, std::size_t off = 0) {
  SwitchTimes t;
  t.m = std::move(m);
  t.total = total;
  t.off = off;
  return t;
}

void check_feasible(const timeseries::SortedSeries& s, const IclsResult& r, std::size_t n) {
  const auto codes = build_um(r.m, n);
  REQUIRE(codes.size() == s.size());
  for (double v : r.x_bar) CHECK(v >= -1e-12);
  for (std::size_t t = 0; t < s.size(); ++t) CHECK(combo_level(codes[t], r.x) <= s.values[t] + 1e-9);
  CHECK(r.min_multiplier >= -1e-8);
  CHECK(r.stationarity <= 1e-8);
  CHECK(r.max_violation <= 1e-9);
}

// Independent fixed-m solve for n = 2 in plain sizes (x1 >= x2 >= 0):
// minimise a convex quadratic over a polygon by checking the free optimum,
// the optimum on every edge line and every vertex.
std::vector<double> polygon_qp(const timeseries::SortedSeries& s, const SwitchTimes& m) {
  const auto codes = build_um(m, 2);
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector3d> rows;  // a' x <= b as (a1, a2, b)
  rows.push_back({-1.0, 1.0, 0.0});   // x2 <= x1
  rows.push_back({0.0, -1.0, 0.0});   // x2 >= 0
  std::vector<double> cap(4, std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < codes.size(); ++t) {
    Eigen::Vector2d a{unit_on(codes[t], 2, 0) ? 1.0 : 0.0, unit_on(codes[t], 2, 1) ? 1.0 : 0.0};
    H += a * a.transpose();
    g += s.values[t] * a;
    cap[codes[t]] = std::min(cap[codes[t]], s.values[t]);
  }
  for (Combo d = 1; d < 4; ++d)
    if (std::isfinite(cap[d])) rows.push_back({unit_on(d, 2, 0) ? 1.0 : 0.0, unit_on(d, 2, 1) ? 1.0 : 0.0, cap[d]});
  auto feasible = [&](const Eigen::Vector2d& x) {
    for (const auto& r : rows)
      if (r(0) * x(0) + r(1) * x(1) > r(2) + 1e-12) return false;
    return true;
  };
  auto f = [&](const Eigen::Vector2d& x) { return 0.5 * x.dot(H * x) - g.dot(x); };
  std::vector<Eigen::Vector2d> cands;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(H);
  if (lu.rank() == 2) cands.push_back(lu.solve(g));
  for (const auto& r : rows) {
    const Eigen::Vector2d a = r.head<2>();
    Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
    K.topLeftCorner<2, 2>() = H;
    K.block<2, 1>(0, 2) = a;
    K.block<1, 2>(2, 0) = a.transpose();
    Eigen::FullPivLU<Eigen::Matrix3d> kl(K);
    if (kl.rank() == 3) cands.push_back(kl.solve(Eigen::Vector3d{g(0), g(1), r(2)}).head<2>());
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      Eigen::Matrix2d M;
      M << rows[i](0), rows[i](1), rows[j](0), rows[j](1);
      if (std::abs(M.determinant()) < 1e-14) continue;
      cands.push_back(M.inverse() * Eigen::Vector2d{rows[i](2), rows[j](2)});
    }
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  double fb = f(best);
  for (const auto& c : cands)
    if (feasible(c) && f(c) < fb - 1e-15) best = c, fb = f(c);
  return {best(0), best(1)};
}

}  // namespace

TEST_SUITE("icls") {

TEST_CASE("switch-state rows") {
  const auto one = build_um(times({}, 5), 1);
  CHECK(one == std::vector<Combo>(5, 1));
  CHECK(build_um(times({1, 1}, 4), 2) == std::vector<Combo>{1, 2, 3, 3});
  CHECK(build_um(times({1, 1}, 6, 2), 2) == std::vector<Combo>{0, 0, 1, 2, 3, 3});
  CHECK_THROWS_AS(build_um(times({2, 2}, 4), 2), DomainError);
  CHECK_THROWS_AS(build_um(times({0, 2}, 4), 2), DomainError);
  CHECK_THROWS_AS(build_um(times({1}, 4), 2), DomainError);
  CHECK_THROWS_AS(build_um(times({1, 1}, 4, 2), 2), DomainError);
  const auto eq = equidistant(140, 3);
  CHECK(eq.m == std::vector<std::size_t>(6, 20));
  CHECK(eq.last_block() == 20);
  CHECK_THROWS_AS(equidistant(2, 2), DomainError);
}

TEST_CASE("hand-traced fixed-m solve") {
  const auto s = sorted_of({0.2, 0.5, 0.9});
  const auto r = solve_icls_fixed_m(s, times({1, 1}, 3), 2);
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.x_bar[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.x_bar[1] == doctest::Approx(0.2).epsilon(1e-12));
  check_feasible(s, r, 2);
}

TEST_CASE("constant series puts the level on the all-on block") {
  const auto s = sorted_of(std::vector<double>(12, 0.8));
  const auto r = solve_icls_fixed_m(s, times({2, 3}, 12), 2);
  CHECK(r.x[0] + r.x[1] == doctest::Approx(0.8).epsilon(1e-12));
  check_feasible(s, r, 2);
}

TEST_CASE("inactive constraints give the plain least-squares answer") {
  // Equidistant blocks on a staircase: each block sits at or above its fit.
  std::vector<double> v;
  for (double level : {0.2, 0.4, 0.6})
    for (int k = 0; k < 5; ++k) v.push_back(level);
  const auto s = sorted_of(v);
  const auto r = solve_icls_fixed_m(s, equidistant(15, 2), 2);
  // Unconstrained least squares on the same rows through the ECLS matrix.
  const auto u = ecls::build_switch_matrix(2, 5);
  Eigen::MatrixXd U(15, 2);
  for (std::size_t row = 0; row < 15; ++row)
    for (std::size_t c = 0; c < 2; ++c) U(row, c) = u.at(row, c);
  const Eigen::VectorXd S = Eigen::Map<const Eigen::VectorXd>(s.values.data(), 15);
  const Eigen::VectorXd ls = U.colPivHouseholderQr().solve(S);
  CHECK(std::abs(r.x[0] - ls(0)) <= 1e-10);
  CHECK(std::abs(r.x[1] - ls(1)) <= 1e-10);
}

TEST_CASE("counting switch times") {
  CHECK(count_switch_times(10, 1, false) == 1);
  CHECK(count_switch_times(10, 1, true) == 10);
  CHECK(count_switch_times(30, 2, false) == 406);  // C(29, 2)
  CHECK(count_switch_times(30, 2, true) == 4060);  // C(30, 3)
  CHECK(count_switch_times(2, 2) == 0);
  CHECK(count_switch_times(100000, 6) == UINT64_MAX);
  const auto s = sorted_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  IclsOptions all;
  all.restarts = 1000;
  CHECK(optimize_m(s, 2, all).restarts_used == static_cast<int>(count_switch_times(6, 2)));
  all.search_off = false;
  CHECK(optimize_m(s, 2, all).restarts_used == static_cast<int>(count_switch_times(6, 2, false)));
}

TEST_CASE("full restarts match enumeration and an independent solve") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t T = 3 + rng.below(14);
    std::vector<double> v(T);
    for (double& x : v) x = rng.uniform() < 0.3 ? std::round(rng.uniform(0.05, 1.0) * 4) / 4 : rng.uniform(0.01, 1.0);
    const auto s = sorted_of(v);
    const std::size_t len = s.size();  // zeros are dropped
    if (len < 3) continue;
    for (bool with_off : {false, true}) {
      IclsOptions opts;
      opts.search_off = with_off;
      opts.restarts = static_cast<int>(count_switch_times(len, 2, with_off));
      const auto best = optimize_m(s, 2, opts);
      const auto exhaustive = enumerate_m(s, 2, with_off);
      CHECK(std::abs(best.solar_utilization - exhaustive.solar_utilization) <= 1e-9);
      check_feasible(s, best, 2);

      double oracle = 0.0;
      for (std::size_t off = 0; off <= (with_off ? len - 3 : 0); ++off)
        for (std::size_t a = 1; off + a + 1 < len; ++a)
          for (std::size_t b = 1; off + a + b < len; ++b) {
            const auto x = polygon_qp(s, times({a, b}, len, off));
            oracle = std::max(oracle, dispatch::solar_utilization_sorted(s.values, x));
          }
      CHECK(std::abs(best.solar_utilization - oracle) <= 1e-9);
    }
  }
}

TEST_CASE("local search only improves on its start") {
  Rng rng(4);
  std::vector<double> v(300);
  for (double& x : v) x = rng.uniform(0.01, 1.0);
  const auto s = sorted_of(v);
  for (std::size_t n : {1, 2, 3}) {
    const auto start = solve_icls_fixed_m(s, equidistant(s.size(), n), n);
    IclsOptions one;
    one.restarts = 1;
    const auto r = optimize_m(s, n, one);
    CHECK(r.solar_utilization >= start.solar_utilization);
    check_feasible(s, r, n);
    CHECK(std::is_sorted(r.x.rbegin(), r.x.rend()));
  }
}

TEST_CASE("pinned off prefix caps the smallest unit") {
  std::vector<double> v{0.01};
  for (int k = 0; k < 50; ++k) v.push_back(0.5 + 0.01 * k);
  const auto s = sorted_of(v);
  IclsOptions pinned;
  pinned.search_off = false;
  const auto r = optimize_m(s, 1, pinned);
  CHECK(r.x[0] == doctest::Approx(0.01));
  const auto free = optimize_m(s, 1);
  CHECK(free.m.off >= 1);
  CHECK(free.solar_utilization > r.solar_utilization);
}

TEST_CASE("seeded restarts are reproducible") {
  Rng rng(8);
  std::vector<double> v(500);
  for (double& x : v) x = rng.uniform(0.0, 1.0) * rng.uniform(0.0, 1.0);
  const auto s = sorted_of(v);
  IclsOptions opts;
  opts.restarts = 6;
  const auto a = optimize_m(s, 3, opts);
  const auto b = optimize_m(s, 3, opts);
  CHECK(a.x == b.x);
  CHECK(a.m.m == b.m.m);
  CHECK(a.restarts_used == 6);
  CHECK_THROWS_AS(optimize_m(s, 3, IclsOptions{0, 42, 100, true}), DomainError);
}

}
