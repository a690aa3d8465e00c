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

#include <cstddef>
#include <span>
#include <vector>

#include "loadsizer/combination.hpp"
#include "loadsizer/timeseries.hpp"

namespace loadsizer::ecls {

using loadsizer::binary_order;

// Rows for d = 1 .. 2^n - 1 in ascending order, each repeated block_length
// times. Row contents are the n bits of d, first unit most significant.
struct SwitchMatrix {
  std::size_t n = 0;
  std::size_t block_length = 0;
  std::vector<Combo> codes;  // one per block

  std::size_t rows() const noexcept { return block_length * codes.size(); }
  Combo row_code(std::size_t r) const { return codes[r / block_length]; }
  double at(std::size_t r, std::size_t col) const { return unit_on(row_code(r), n, col) ? 1.0 : 0.0; }
};

struct EclsResult {
  std::vector<double> x;  // non-increasing
  double lambda = 0.0;
  double C = 0.0;
  double residual_norm = 0.0;
  double kkt_residual = 0.0;  // infinity norm of the bordered system residual
  double solar_utilization = 0.0;
  bool has_nonpositive = false;  // some x_i <= 0; such units never switch on
};

struct EclsOptions {
  std::size_t c_steps = 100;
  std::size_t block_length = 20;
};

SwitchMatrix build_switch_matrix(std::size_t n, std::size_t block_length = 20);

std::vector<double> select_points(const timeseries::SortedSeries& sorted, std::size_t count);

// Does not fill solar_utilization.
EclsResult solve_ecls(std::span<const double> points, const SwitchMatrix& u, double C);

// One row per C on the uniform grid over [0.5, 1], SU from dispatch on the
// sorted values.
std::vector<EclsResult> sensitivity_table(const timeseries::SortedSeries& sorted, std::size_t n,
                                          const EclsOptions& opts = {});

EclsResult line_search_C(const timeseries::SortedSeries& sorted, std::size_t n,
                         const EclsOptions& opts = {});

// Argmax of a sensitivity table: units with x_i <= 0 rank last, then highest
// SU, then smallest C.
std::size_t best_row(const std::vector<EclsResult>& table);

}  // namespace loadsizer::ecls
