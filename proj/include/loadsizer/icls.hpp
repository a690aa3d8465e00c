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
#include <cstdint>
#include <vector>

#include "loadsizer/combination.hpp"
#include "loadsizer/timeseries.hpp"

namespace loadsizer::icls {

// Block lengths m_1 .. m_{N-1} for the first N-1 of the N = 2^n - 1 switch
// states; the last block takes the remaining total - off - sum(m) rows.
// `off` rows at the low end of the sorted series keep every unit off; they
// carry no under-the-curve constraint, so the smallest unit is no longer
// capped by the smallest sample.
struct SwitchTimes {
  std::vector<std::size_t> m;
  std::size_t total = 0;
  std::size_t off = 0;

  std::size_t last_block() const;
};

struct IclsResult {
  std::vector<double> x_bar;  // incremental sizes, >= 0
  std::vector<double> x;      // non-increasing
  SwitchTimes m;
  double residual_norm = 0.0;
  double solar_utilization = 0.0;
  int restarts_used = 0;
  // Active-set certificate at the returned point.
  double min_multiplier = 0.0;
  double stationarity = 0.0;
  double max_violation = 0.0;
};

struct IclsOptions {
  int restarts = 4;
  std::uint64_t seed = 42;
  int max_iter = 10000;  // accepted moves per start
  bool search_off = true;  // false pins off at 0
};

// Row codes of U(m), one per row, blocks in ascending binary order after the
// off rows (code 0).
std::vector<Combo> build_um(const SwitchTimes& m, std::size_t n);

SwitchTimes equidistant(std::size_t total, std::size_t n);

IclsResult solve_icls_fixed_m(const timeseries::SortedSeries& sorted, const SwitchTimes& m,
                              std::size_t n);

// Number of valid switch times for a series of length total, saturating at
// UINT64_MAX. With search_off the off prefix is counted as a free coordinate.
std::uint64_t count_switch_times(std::size_t total, std::size_t n, bool search_off = true);

// Pattern search over m. When restarts reaches count_switch_times, every valid
// m is used as a start.
IclsResult optimize_m(const timeseries::SortedSeries& sorted, std::size_t n,
                      const IclsOptions& opts = {});

// Best fixed-m solution over every valid m; ranking as in optimize_m.
IclsResult enumerate_m(const timeseries::SortedSeries& sorted, std::size_t n, bool search_off = true);

}  // namespace loadsizer::icls
