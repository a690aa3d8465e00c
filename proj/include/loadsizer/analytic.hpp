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
#include <utility>
#include <vector>

#include "loadsizer/clear_sky.hpp"

namespace loadsizer::analytic {

// A symmetric single-peaked power curve S(t), described through its
// half-width w(y): the curve is at or above y exactly on |t| <= w(y).
class SymmetricProfile {
 public:
  enum class Kind { trig, parabola, constant };

  static SymmetricProfile from_model(const timeseries::ClearSkyModel& model);
  // S(t) = peak - curvature * t^2.
  static SymmetricProfile parabola(double peak, double curvature);
  // S(t) = level on |t| <= half_width, 0 outside.
  static SymmetricProfile constant(double level, double half_width);

  Kind kind() const noexcept { return kind_; }
  double y_max() const noexcept { return y_max_; }
  double t_max() const noexcept { return t_max_; }

  double value(double t) const;              // S(t), clamped at 0
  double half_width(double y) const;         // w(y)
  double half_width_derivative(double y) const;  // dw/dy

 private:
  Kind kind_ = Kind::trig;
  timeseries::ClearSkyModel model_;
  double peak_ = 0.0;
  double curvature_ = 0.0;
  double y_max_ = 0.0;
  double t_max_ = 0.0;
};

struct AnalyticSolution {
  std::vector<double> sizes;        // base unit sizes, non-decreasing
  std::vector<double> levels;       // 2^n - 1 combination levels, sorted
  std::vector<double> switch_times; // |t| at each level
  std::vector<long> switch_times_rounded;
  double area = 0.0;
  double total_energy = 0.0;
  double solar_utilization = 0.0;
  int iterations = 0;
};

// Sum of S(t) over integer t in [-round(t_max), round(t_max)].
double total_energy(const SymmetricProfile& profile);

// Single load: root of w(y) + y w'(y) = 0 by bisection.
AnalyticSolution solve_single_load(const SymmetricProfile& profile);

// Reference scan of 2 w(y) y over y_j = j y_max / grid_size, 0 < j < grid_size.
AnalyticSolution line_search_single(const SymmetricProfile& profile, std::size_t grid_size);

// Captured area with two units: levels y1, y2 and y1 + y2.
double two_load_area(const SymmetricProfile& profile, double y1, double y2);
std::pair<double, double> two_load_gradient(const SymmetricProfile& profile, double y1, double y2);

struct TwoLoadOptions {
  double step = 1e-4;
  double tol = 1e-6;
  int max_iter = 20000;
};

// Projected gradient ascent on the two-unit area over
// {0 <= y1 <= y2, y1 + y2 <= y_max - eps}. Throws NumericError at max_iter.
AnalyticSolution solve_two_load(const SymmetricProfile& profile, std::pair<double, double> init,
                                const TwoLoadOptions& opts = {});

// Area under the staircase formed by all subset sums of `sizes`.
// Throws DomainError if a size is not positive or a level reaches y_max.
double area_n(const SymmetricProfile& profile, std::span<const double> sizes);

struct MultiLoadOptions {
  int multistarts = 16;
  std::uint64_t seed = 42;
  double tol = 1e-7;
  int max_iter = 20000;
};

AnalyticSolution solve_n_load(const SymmetricProfile& profile, int n,
                              const MultiLoadOptions& opts = {});

}  // namespace loadsizer::analytic
