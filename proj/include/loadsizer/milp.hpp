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
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "loadsizer/simplex.hpp"
#include "loadsizer/timeseries.hpp"

namespace loadsizer::milp {

inline constexpr double kDefaultBigM = 1e6;

// Variables: x (n), u and y (n x T each, index i * T + t).
struct MilpInstance {
  std::vector<double> s;
  std::size_t n = 0;
  double big_m = kDefaultBigM;

  std::size_t steps() const noexcept { return s.size(); }
  std::size_t binaries() const noexcept { return n * s.size(); }
  std::size_t continuous() const noexcept { return n + n * s.size(); }
  // sum y <= s per t; four big-M rows per (i, t); x_i >= x_{i+1}.
  std::size_t constraints() const noexcept { return s.size() + 4 * n * s.size() + (n - 1); }
};

// Tightens big_m to max(s) unless tighten is false.
MilpInstance build_instance(std::span<const double> s, std::size_t n, double big_m = kDefaultBigM,
                            bool tighten = true);

enum class Fix : std::int8_t { free = -1, off = 0, on = 1 };
using Fixings = std::vector<Fix>;  // one per binary, index i * T + t

struct Relaxation {
  lp::Status status = lp::Status::optimal;
  double objective_lb = 0.0;  // mismatch sum(s) - sum(y)
  std::vector<double> x;
  std::vector<double> y;  // n x T
  std::vector<double> u;  // n x T
};

// LP relaxation of the full big-M formulation with binaries fixed or in [0, 1].
Relaxation solve_lp_relaxation(const MilpInstance& instance, const Fixings& fixings);

// The same bound from the LP in x alone: a free unit may serve anything in
// [0, x_i], so at each step the captured power is min(s_t, sum over on and
// free units) subject to the on units fitting under s_t. The reported u is
// y / x with free units filled largest-subset first.
Relaxation solve_projected_relaxation(const MilpInstance& instance, const Fixings& fixings);

struct ScheduleValue {
  std::vector<double> x;
  double objective = 0.0;
  double sum_x = 0.0;
};

// Best x for a fixed n x T schedule: the most captured energy, then the
// smallest sum(x).
ScheduleValue evaluate_schedule(const MilpInstance& instance, std::span<const std::uint8_t> u);

enum class Status { optimal, gap_limit, node_limit };
std::string_view status_name(Status s);

struct MilpSolution {
  std::vector<double> x;         // non-increasing
  std::vector<std::uint8_t> u;   // n x T
  std::vector<double> y;         // n x T
  double objective = 0.0;
  double captured = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  std::size_t nodes_explored = 0;
  Status status = Status::optimal;
};

struct Options {
  double gap_tol = 0.0;
  std::size_t node_limit = 2000;
  // Called with each explored node's fixings and LP bound.
  std::function<void(const Fixings&, double)> on_node;
};

// Best-first branch and bound on the projected relaxation, branching on the
// most fractional u (lowest index on ties). Among equal objectives the
// smallest sum(x) wins.
MilpSolution branch_and_bound(const MilpInstance& instance, const Options& opts = {});

struct SweepRow {
  std::size_t ratio = 1;
  std::size_t samples = 0;
  std::vector<double> x;
  double objective = 0.0;
  double solar_utilization = 0.0;  // dispatch of x on the full sorted series
  double runtime_seconds = 0.0;
  std::size_t nodes = 0;
  Status status = Status::optimal;
  double gap = 0.0;
};

struct SweepOptions {
  Options bnb;
  double big_m = kDefaultBigM;
  bool tighten = true;
};

std::vector<SweepRow> downsample_sweep(const timeseries::SortedSeries& sorted, std::size_t n,
                                       std::span<const std::size_t> ratios,
                                       const SweepOptions& opts = {});

}  // namespace loadsizer::milp
