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

#include "loadsizer/dispatch.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <string>

#include "loadsizer/error.hpp"
#include "loadsizer/kernels.hpp"

namespace loadsizer::dispatch {

namespace {

constexpr std::size_t kTableUnits = 12;

bool usable(Combo d, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (unit_on(d, x.size(), i) && !(x[i] > 0.0)) return false;
  return true;
}

}  // namespace

Dispatcher::Dispatcher(std::span<const double> x) : x_(x.begin(), x.end()) {
  const std::size_t n = x_.size();
  if (n == 0) throw DomainError("dispatch needs at least one unit");
  if (n > kMaxEnumeratedUnits)
    throw DomainError("dispatch supports at most " + std::to_string(kMaxEnumeratedUnits) + " units");

  std::vector<Combo> all;
  all.reserve(combo_count(n));
  for (Combo d = 0; d < combo_count(n); ++d)
    if (usable(d, x_)) all.push_back(d);

  sorted_values_.reserve(all.size());
  for (Combo d : all) sorted_values_.push_back(combo_level(d, x_));
  std::sort(sorted_values_.begin(), sorted_values_.end());
  sorted_values_.erase(std::unique(sorted_values_.begin(), sorted_values_.end()),
                       sorted_values_.end());

  if (n <= kTableUnits) {
    std::stable_sort(all.begin(), all.end(),
                     [](Combo a, Combo b) { return std::popcount(a) < std::popcount(b); });
    combos_ = std::move(all);
    levels_.reserve(combos_.size());
    for (Combo d : combos_) levels_.push_back(combo_level(d, x_));
  }
}

Combo Dispatcher::best(double cap) const {
  if (!levels_.empty()) {
    const std::size_t k = kernels::best_level(levels_, cap + kCapSlack);
    return k < combos_.size() ? combos_[k] : 0;
  }
  return search(cap + kCapSlack);
}

double Dispatcher::best_value(double cap) const {
  auto it = std::upper_bound(sorted_values_.begin(), sorted_values_.end(), cap + kCapSlack);
  return it == sorted_values_.begin() ? 0.0 : *(it - 1);
}

Combo Dispatcher::search(double cap) const {
  const std::size_t n = x_.size();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (x_[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x_[a] != x_[b] ? x_[a] > x_[b] : a < b;
  });
  std::vector<double> suffix(order.size() + 1, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) suffix[k] = suffix[k + 1] + x_[order[k]];

  double best_v = 0.0;
  int best_count = 0;
  Combo best_d = 0;
  auto visit = [&](auto&& self, std::size_t k, double sum, int count, Combo d) -> void {
    if (sum > best_v || (sum == best_v && (count < best_count || (count == best_count && d < best_d)))) {
      best_v = sum;
      best_count = count;
      best_d = d;
    }
    if (k == order.size() || sum + suffix[k] < best_v) return;
    const std::size_t unit = order[k];
    const double with = sum + x_[unit];
    if (with <= cap) self(self, k + 1, with, count + 1, d | (Combo{1} << (n - 1 - unit)));
    self(self, k + 1, sum, count, d);
  };
  visit(visit, 0, 0.0, 0, 0);
  return best_d;
}

SwitchSchedule dispatch_greedy(std::span<const double> s, std::span<const double> x) {
  const Dispatcher dispatcher(x);
  SwitchSchedule schedule;
  schedule.n = x.size();
  schedule.combo_index.reserve(s.size());
  for (double v : s) schedule.combo_index.push_back(dispatcher.best(v));
  return schedule;
}

SwitchSchedule dispatch_greedy(const timeseries::PowerSeries& series, std::span<const double> x) {
  return dispatch_greedy(std::span<const double>(series.power), x);
}

UtilizationReport utilization(std::span<const double> s, const SwitchSchedule& schedule,
                              std::span<const double> x) {
  if (schedule.steps() != s.size() || schedule.n != x.size())
    throw DomainError("schedule dimensions do not match the series and sizing");
  UtilizationReport report;
  report.total_energy = kernels::sum(s);
  if (!(report.total_energy > 0.0)) throw DomainError("series has zero total energy");
  report.mismatch.resize(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    const double served = combo_level(schedule.combo_index[t], x);
    report.captured_energy += served;
    report.mismatch[t] = s[t] - served;
  }
  report.solar_utilization = report.captured_energy / report.total_energy;
  return report;
}

double captured_energy(std::span<const double> s, std::span<const double> x) {
  const Dispatcher dispatcher(x);
  double captured = 0.0;
  for (double v : s) captured += dispatcher.best_value(v);
  return captured;
}

double solar_utilization(std::span<const double> s, std::span<const double> x) {
  const double total = kernels::sum(s);
  if (!(total > 0.0)) throw DomainError("series has zero total energy");
  return captured_energy(s, x) / total;
}

double captured_energy_sorted(std::span<const double> s, std::span<const double> x) {
  const Dispatcher dispatcher(x);
  const auto& levels = dispatcher.sorted_levels();
  double captured = 0.0;
  std::size_t k = 0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double v : s) {
    if (v < prev) throw DomainError("captured_energy_sorted needs a non-decreasing series");
    prev = v;
    while (k + 1 < levels.size() && levels[k + 1] <= v + kCapSlack) ++k;
    captured += levels[k];
  }
  return captured;
}

double solar_utilization_sorted(std::span<const double> s, std::span<const double> x) {
  const double total = kernels::sum(s);
  if (!(total > 0.0)) throw DomainError("series has zero total energy");
  return captured_energy_sorted(s, x) / total;
}

ComboHistogram combo_histogram(const timeseries::PowerSeries& series, const SwitchSchedule& schedule,
                               std::size_t bins_per_day) {
  constexpr std::int64_t kDay = 86400;
  if (bins_per_day == 0 || bins_per_day > static_cast<std::size_t>(kDay))
    throw DomainError("bins_per_day must be in [1, 86400]");
  if (schedule.steps() != series.size())
    throw DomainError("schedule length does not match the series");
  ComboHistogram h;
  h.bins_per_day = bins_per_day;
  h.combos = combo_count(schedule.n);
  h.counts.assign(bins_per_day * h.combos, 0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!(series.power[t] > 0.0)) continue;
    const std::int64_t second = ((series.timestamp(t) % kDay) + kDay) % kDay;
    const auto bin = static_cast<std::size_t>(second) * bins_per_day / kDay;
    ++h.at(bin, schedule.combo_index[t]);
  }
  return h;
}

}  // namespace loadsizer::dispatch
