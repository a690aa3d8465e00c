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

#include "loadsizer/ecls.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "loadsizer/dispatch.hpp"
#include "loadsizer/error.hpp"

namespace loadsizer::ecls {

SwitchMatrix build_switch_matrix(std::size_t n, std::size_t block_length) {
  if (n < 1 || n > 12) throw DomainError("switch matrix needs 1 <= n <= 12");
  if (block_length < 1) throw DomainError("block length must be positive");
  SwitchMatrix u;
  u.n = n;
  u.block_length = block_length;
  for (Combo d = 1; d < combo_count(n); ++d) u.codes.push_back(d);
  return u;
}

std::vector<double> select_points(const timeseries::SortedSeries& sorted, std::size_t count) {
  const std::size_t len = sorted.size();
  if (count == 0) throw DomainError("select_points needs count >= 1");
  if (count > len)
    throw DomainError("cannot select " + std::to_string(count) + " points from " +
                      std::to_string(len) + " samples");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t j = 1; j <= count; ++j) out.push_back(sorted.values[j * len / count - 1]);
  return out;
}

EclsResult solve_ecls(std::span<const double> points, const SwitchMatrix& u, double C) {
  if (!(C >= 0.5 && C <= 1.0)) throw DomainError("C must lie in [0.5, 1]");
  if (points.size() != u.rows())
    throw DomainError("point count " + std::to_string(points.size()) + " does not match " +
                      std::to_string(u.rows()) + " switch-matrix rows");
  const auto n = static_cast<Eigen::Index>(u.n);

  // U^T U and U^T S accumulate per block since rows repeat.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (std::size_t k = 0; k < u.codes.size(); ++k) {
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) b(i) = unit_on(u.codes[k], u.n, static_cast<std::size_t>(i));
    double block_sum = 0.0;
    for (std::size_t r = k * u.block_length; r < (k + 1) * u.block_length; ++r) block_sum += points[r];
    kkt.topLeftCorner(n, n) += static_cast<double>(u.block_length) * b * b.transpose();
    rhs.head(n) += block_sum * b;
  }
  kkt.block(0, n, n, 1).setOnes();
  kkt.block(n, 0, 1, n).setOnes();
  rhs(n) = C;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (lu.rank() < n + 1) throw NumericError("ECLS KKT matrix is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);

  EclsResult r;
  r.C = C;
  r.lambda = sol(n);
  r.kkt_residual = (kkt * sol - rhs).lpNorm<Eigen::Infinity>();

  std::vector<double> x(sol.data(), sol.data() + n);
  double sq = 0.0;
  for (std::size_t row = 0; row < points.size(); ++row) {
    const double e = points[row] - combo_level(u.row_code(row), x);
    sq += e * e;
  }
  r.residual_norm = std::sqrt(sq);
  r.has_nonpositive = std::any_of(x.begin(), x.end(), [](double v) { return !(v > 0.0); });
  std::sort(x.begin(), x.end(), std::greater<>());
  r.x = std::move(x);
  return r;
}

std::vector<EclsResult> sensitivity_table(const timeseries::SortedSeries& sorted, std::size_t n,
                                          const EclsOptions& opts) {
  if (opts.c_steps < 2) throw DomainError("C line search needs at least 2 steps");
  const std::size_t blocks = combo_count(n) - 1;
  // Short series get shorter blocks rather than an error.
  const std::size_t block_length = std::min(opts.block_length, sorted.size() / blocks);
  if (block_length == 0)
    throw DomainError("series has " + std::to_string(sorted.size()) + " samples; ECLS with n=" +
                      std::to_string(n) + " needs at least " + std::to_string(blocks));
  const SwitchMatrix u = build_switch_matrix(n, block_length);
  const std::vector<double> points = select_points(sorted, u.rows());

  std::vector<EclsResult> table;
  table.reserve(opts.c_steps);
  for (std::size_t j = 0; j < opts.c_steps; ++j) {
    const double C = 0.5 + 0.5 * static_cast<double>(j) / static_cast<double>(opts.c_steps - 1);
    EclsResult r = solve_ecls(points, u, C);
    r.solar_utilization = dispatch::solar_utilization_sorted(sorted.values, r.x);
    table.push_back(std::move(r));
  }
  return table;
}

std::size_t best_row(const std::vector<EclsResult>& table) {
  if (table.empty()) throw DomainError("empty sensitivity table");
  std::size_t best = 0;
  for (std::size_t j = 1; j < table.size(); ++j) {
    const EclsResult& a = table[j];
    const EclsResult& b = table[best];
    if (a.has_nonpositive != b.has_nonpositive) {
      if (!a.has_nonpositive) best = j;
    } else if (a.solar_utilization > b.solar_utilization) {
      best = j;
    }
  }
  return best;
}

EclsResult line_search_C(const timeseries::SortedSeries& sorted, std::size_t n,
                         const EclsOptions& opts) {
  auto table = sensitivity_table(sorted, n, opts);
  return std::move(table[best_row(table)]);
}

}  // namespace loadsizer::ecls
