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
#include <span>
#include <vector>

#include "loadsizer/combination.hpp"
#include "loadsizer/timeseries.hpp"

namespace loadsizer::dispatch {

// Slack added to S(t) before comparing against a combination level.
inline constexpr double kCapSlack = 1e-12;

struct SwitchSchedule {
  std::size_t n = 0;
  std::vector<Combo> combo_index;  // one per timestep

  std::size_t steps() const noexcept { return combo_index.size(); }
  bool on(std::size_t unit, std::size_t t) const { return unit_on(combo_index[t], n, unit); }
};

struct UtilizationReport {
  double captured_energy = 0.0;
  double total_energy = 0.0;
  double solar_utilization = 0.0;
  std::vector<double> mismatch;  // S(t) - u_t . x
};

struct ComboHistogram {
  std::size_t bins_per_day = 0;
  std::size_t combos = 0;           // 2^n, index 0 is "all off during daylight"
  std::vector<std::size_t> counts;  // bins_per_day x combos, row-major

  std::size_t& at(std::size_t bin, Combo d) { return counts[bin * combos + d]; }
  std::size_t at(std::size_t bin, Combo d) const { return counts[bin * combos + d]; }
};

// Best attainable switch state per cap value for one fixed sizing. Units with
// x_i <= 0 are never switched on.
class Dispatcher {
 public:
  explicit Dispatcher(std::span<const double> x);

  std::size_t units() const noexcept { return x_.size(); }
  // Maximal u.x <= cap; ties go to fewer units on, then the lower combo index.
  Combo best(double cap) const;
  // Value of best(cap) without the tie-break bookkeeping.
  double best_value(double cap) const;
  // Distinct attainable levels, ascending, starting at 0.
  const std::vector<double>& sorted_levels() const noexcept { return sorted_values_; }

 private:
  Combo search(double cap) const;

  std::vector<double> x_;
  // Exhaustive table for n <= 12, ordered by (popcount, d).
  std::vector<double> levels_;
  std::vector<Combo> combos_;
  // Distinct level values ascending, for best_value.
  std::vector<double> sorted_values_;
};

SwitchSchedule dispatch_greedy(std::span<const double> s, std::span<const double> x);
SwitchSchedule dispatch_greedy(const timeseries::PowerSeries& series, std::span<const double> x);

UtilizationReport utilization(std::span<const double> s, const SwitchSchedule& schedule,
                              std::span<const double> x);

// Captured energy and SU of the dispatch of x, without building a schedule.
double captured_energy(std::span<const double> s, std::span<const double> x);
double solar_utilization(std::span<const double> s, std::span<const double> x);
// Same values for non-decreasing s, by a single merge over the levels.
double captured_energy_sorted(std::span<const double> s, std::span<const double> x);
double solar_utilization_sorted(std::span<const double> s, std::span<const double> x);

ComboHistogram combo_histogram(const timeseries::PowerSeries& series, const SwitchSchedule& schedule,
                               std::size_t bins_per_day = 24);

}  // namespace loadsizer::dispatch
