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

#include "loadsizer/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "loadsizer/error.hpp"
#include "loadsizer/rng.hpp"

namespace loadsizer::analytic {

namespace {

// Keeps asin arguments and level sums strictly inside the curve.
constexpr double kEpsFraction = 1e-6;

std::vector<long> rounded(const std::vector<double>& v) {
  std::vector<long> out;
  out.reserve(v.size());
  for (double t : v) out.push_back(std::lround(t));
  return out;
}

// Sorted subset sums for subset masks 1 .. 2^n - 1, bit j selecting sizes[j].
std::vector<double> combination_levels(std::span<const double> sizes) {
  const std::size_t count = (std::size_t{1} << sizes.size()) - 1;
  std::vector<double> levels(count);
  for (std::size_t mask = 1; mask <= count; ++mask) {
    double sum = 0.0;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      if (mask >> j & 1U) sum += sizes[j];
    levels[mask - 1] = sum;
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

// Staircase area for sorted levels; no domain checks.
double staircase_area(const SymmetricProfile& p, const std::vector<double>& levels) {
  double area = 0.0;
  double below = 0.0;
  for (double level : levels) {
    if (level > below) area += 2.0 * p.half_width(level) * (level - below);
    below = std::max(below, level);
  }
  return area;
}

double unchecked_area(const SymmetricProfile& p, std::span<const double> sizes) {
  return staircase_area(p, combination_levels(sizes));
}

AnalyticSolution make_solution(const SymmetricProfile& p, std::vector<double> sizes, double area) {
  AnalyticSolution s;
  std::sort(sizes.begin(), sizes.end());
  s.levels = combination_levels(sizes);
  s.sizes = std::move(sizes);
  s.switch_times.reserve(s.levels.size());
  for (double level : s.levels) s.switch_times.push_back(p.half_width(level));
  s.switch_times_rounded = rounded(s.switch_times);
  s.area = area;
  s.total_energy = total_energy(p);
  s.solar_utilization = s.area / s.total_energy;
  return s;
}

}  // namespace

SymmetricProfile SymmetricProfile::from_model(const timeseries::ClearSkyModel& model) {
  if (!(model.y_max > 0.0) || !(model.trig.b > 0.0))
    throw DomainError("clear-sky model is not a valid single-peaked curve");
  SymmetricProfile p;
  p.kind_ = Kind::trig;
  p.model_ = model;
  p.y_max_ = model.y_max;
  p.t_max_ = model.t_max;
  return p;
}

SymmetricProfile SymmetricProfile::parabola(double peak, double curvature) {
  if (!(peak > 0.0) || !(curvature > 0.0))
    throw DomainError("parabola profile needs positive peak and curvature");
  SymmetricProfile p;
  p.kind_ = Kind::parabola;
  p.peak_ = peak;
  p.curvature_ = curvature;
  p.y_max_ = peak;
  p.t_max_ = std::sqrt(peak / curvature);
  return p;
}

SymmetricProfile SymmetricProfile::constant(double level, double half_width) {
  if (!(level > 0.0) || !(half_width > 0.0))
    throw DomainError("constant profile needs positive level and half width");
  SymmetricProfile p;
  p.kind_ = Kind::constant;
  p.peak_ = level;
  p.y_max_ = level;
  p.t_max_ = half_width;
  return p;
}

double SymmetricProfile::value(double t) const {
  switch (kind_) {
    case Kind::trig: {
      const auto& tr = model_.trig;
      if (t < -tr.c / tr.b || t > t_max_) return 0.0;
      return std::max(0.0, model_.evaluate(t));
    }
    case Kind::parabola:
      return std::max(0.0, peak_ - curvature_ * t * t);
    case Kind::constant:
      return std::abs(t) <= t_max_ ? peak_ : 0.0;
  }
  return 0.0;
}

double SymmetricProfile::half_width(double y) const {
  switch (kind_) {
    case Kind::trig: {
      const auto& inv = model_.inverse;
      return -(inv.alpha * std::asin(std::clamp(inv.beta * y, -1.0, 1.0)) + inv.gamma);
    }
    case Kind::parabola:
      return std::sqrt(std::max(0.0, peak_ - y) / curvature_);
    case Kind::constant:
      return y <= peak_ ? t_max_ : 0.0;
  }
  return 0.0;
}

double SymmetricProfile::half_width_derivative(double y) const {
  switch (kind_) {
    case Kind::trig: {
      const auto& inv = model_.inverse;
      const double by = inv.beta * y;
      return -inv.alpha * inv.beta / std::sqrt(1.0 - by * by);
    }
    case Kind::parabola: {
      const double w = half_width(y);
      return w > 0.0 ? -1.0 / (2.0 * curvature_ * w) : -std::numeric_limits<double>::infinity();
    }
    case Kind::constant:
      return 0.0;
  }
  return 0.0;
}

double total_energy(const SymmetricProfile& profile) {
  const long k = std::lround(profile.t_max());
  double sum = 0.0;
  for (long t = -k; t <= k; ++t) sum += profile.value(static_cast<double>(t));
  return sum;
}

AnalyticSolution solve_single_load(const SymmetricProfile& profile) {
  const double ymax = profile.y_max();
  if (profile.kind() == SymmetricProfile::Kind::constant) {
    // The rectangle is the curve itself.
    return make_solution(profile, {ymax}, 2.0 * profile.t_max() * ymax);
  }
  // dA/dy / 2 for A(y) = 2 y w(y).
  auto stationarity = [&](double y) {
    return profile.half_width(y) + y * profile.half_width_derivative(y);
  };
  double lo = kEpsFraction * ymax;
  double hi = ymax - kEpsFraction * ymax;
  double f_lo = stationarity(lo);
  const double f_hi = stationarity(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0))
    throw NumericError("single-load stationarity condition has no sign change on [eps, y_max-eps]");
  int iterations = 0;
  while (hi - lo > 1e-8 && iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = stationarity(mid);
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  const double y = 0.5 * (lo + hi);
  auto s = make_solution(profile, {y}, 2.0 * profile.half_width(y) * y);
  s.iterations = iterations;
  return s;
}

AnalyticSolution line_search_single(const SymmetricProfile& profile, std::size_t grid_size) {
  if (grid_size < 10) throw DomainError("line search grid must have at least 10 points");
  const double ymax = profile.y_max();
  double best_y = 0.0;
  double best_area = -1.0;
  for (std::size_t j = 1; j < grid_size; ++j) {
    const double y = ymax * static_cast<double>(j) / static_cast<double>(grid_size);
    const double area = 2.0 * profile.half_width(y) * y;
    if (area > best_area) {
      best_area = area;
      best_y = y;
    }
  }
  if (profile.kind() == SymmetricProfile::Kind::constant) {
    best_y = ymax;
    best_area = 2.0 * profile.t_max() * ymax;
  }
  auto s = make_solution(profile, {best_y}, best_area);
  s.iterations = static_cast<int>(grid_size - 1);
  return s;
}

double two_load_area(const SymmetricProfile& p, double y1, double y2) {
  return 2.0 * y1 * (p.half_width(y1) - p.half_width(y2) + p.half_width(y1 + y2)) +
         2.0 * y2 * p.half_width(y2);
}

std::pair<double, double> two_load_gradient(const SymmetricProfile& p, double y1, double y2) {
  const double y3 = y1 + y2;
  const double w1 = p.half_width(y1), w2 = p.half_width(y2), w3 = p.half_width(y3);
  const double d1 = p.half_width_derivative(y1);
  const double d2 = p.half_width_derivative(y2);
  const double d3 = p.half_width_derivative(y3);
  return {2.0 * (w1 - w2 + w3) + 2.0 * y1 * (d1 + d3),
          2.0 * y1 * (d3 - d2) + 2.0 * w2 + 2.0 * y2 * d2};
}

namespace {

// Euclidean projection onto the triangle 0 <= y1 <= y2, y1 + y2 <= r.
std::pair<double, double> project_triangle(double y1, double y2, double r) {
  if (y1 >= 0.0 && y2 >= y1 && y1 + y2 <= r) return {y1, y2};
  struct Pt {
    double a, b;
  };
  const Pt verts[3] = {{0.0, 0.0}, {0.0, r}, {0.5 * r, 0.5 * r}};
  double best_d = std::numeric_limits<double>::infinity();
  Pt best{0.0, 0.0};
  for (int e = 0; e < 3; ++e) {
    const Pt p = verts[e], q = verts[(e + 1) % 3];
    const double dx = q.a - p.a, dy = q.b - p.b;
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0.0 ? ((y1 - p.a) * dx + (y2 - p.b) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    const Pt c{p.a + s * dx, p.b + s * dy};
    const double d = (c.a - y1) * (c.a - y1) + (c.b - y2) * (c.b - y2);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best.a, best.b};
}

}  // namespace

AnalyticSolution solve_two_load(const SymmetricProfile& profile, std::pair<double, double> init,
                                const TwoLoadOptions& opts) {
  const double ymax = profile.y_max();
  const double r = ymax - kEpsFraction * ymax;
  auto [y1, y2] = init;
  if (!(y1 > 0.0 && y1 <= y2 && y2 < ymax))
    throw DomainError("two-load start must satisfy 0 < y1 <= y2 < y_max");
  std::tie(y1, y2) = project_triangle(y1, y2, r);

  double area = two_load_area(profile, y1, y2);
  double step = opts.step;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const auto [g1, g2] = two_load_gradient(profile, y1, y2);
    // Projected-gradient stationarity measure.
    const auto [p1, p2] = project_triangle(y1 + opts.step * g1, y2 + opts.step * g2, r);
    const double measure = std::hypot(p1 - y1, p2 - y2) / opts.step;
    if (measure < opts.tol) {
      auto s = make_solution(profile, {y1, y2}, area);
      s.iterations = iter;
      return s;
    }
    step = std::min(step * 2.0, opts.step * 1e6);
    bool moved = false;
    while (step >= 1e-20) {
      const auto [n1, n2] = project_triangle(y1 + step * g1, y2 + step * g2, r);
      const double trial = two_load_area(profile, n1, n2);
      const double predicted = g1 * (n1 - y1) + g2 * (n2 - y2);
      if (trial >= area + 1e-4 * predicted) {
        moved = n1 != y1 || n2 != y2;
        y1 = n1;
        y2 = n2;
        area = trial;
        break;
      }
      step *= 0.5;
    }
    // A steep curve leaves a residual gradient whose area gain is below
    // rounding; accept it if it is small against the curve's own scale.
    if (!moved && measure * ymax < 1e-3 * area) {
      auto s = make_solution(profile, {y1, y2}, area);
      s.iterations = iter;
      return s;
    }
  }
  throw NumericError("two-load gradient ascent did not converge; last iterate y = (" +
                     std::to_string(y1) + ", " + std::to_string(y2) + ")");
}

double area_n(const SymmetricProfile& profile, std::span<const double> sizes) {
  if (sizes.empty()) throw DomainError("area_n needs at least one unit");
  if (sizes.size() > 20) throw DomainError("area_n supports at most 20 units");
  for (double s : sizes)
    if (!(s > 0.0)) throw DomainError("unit sizes must be positive");
  const auto levels = combination_levels(sizes);
  if (levels.back() >= profile.y_max())
    throw DomainError("combination level " + std::to_string(levels.back()) +
                      " reaches the curve peak " + std::to_string(profile.y_max()));
  return staircase_area(profile, levels);
}

namespace {

// Projection onto {y >= 0, sum(y) <= r}.
void project_capped_simplex(std::vector<double>& y, double r) {
  double total = 0.0;
  for (double& v : y) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (total <= r) return;
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - r) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& v : y) v = std::max(v - theta, 0.0);
}

struct Ascent {
  std::vector<double> sizes;
  double area = 0.0;
  int iterations = 0;
  bool converged = false;
};

Ascent ascend(const SymmetricProfile& profile, std::vector<double> y, double r,
              const MultiLoadOptions& opts) {
  const std::size_t n = y.size();
  project_capped_simplex(y, r);
  double area = unchecked_area(profile, y);
  double step = 1e-4;
  const double h = 1e-7 * profile.y_max();
  std::vector<double> grad(n), trial(n), probe(n);
  Ascent out;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      probe = y;
      probe[i] = y[i] + h;
      const double up = unchecked_area(profile, probe);
      probe[i] = y[i] - h;
      const double down = unchecked_area(profile, probe);
      grad[i] = (up - down) / (2.0 * h);
    }
    // Projected-gradient stationarity measure with unit scaling.
    for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] + 1e-4 * grad[i];
    project_capped_simplex(trial, r);
    double measure = 0.0;
    for (std::size_t i = 0; i < n; ++i) measure += (trial[i] - y[i]) * (trial[i] - y[i]);
    measure = std::sqrt(measure) / 1e-4;
    out.iterations = iter;
    if (measure < opts.tol * std::max(1.0, profile.t_max())) {
      out.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e3);
    bool moved = false;
    while (step > 1e-18) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] + step * grad[i];
      project_capped_simplex(trial, r);
      double predicted = 0.0;
      for (std::size_t i = 0; i < n; ++i) predicted += grad[i] * (trial[i] - y[i]);
      const double value = unchecked_area(profile, trial);
      if (value >= area + 1e-4 * predicted && value >= area) {
        moved = value > area;
        y = trial;
        area = value;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      out.converged = true;
      break;
    }
  }
  out.sizes = std::move(y);
  out.area = area;
  return out;
}

}  // namespace

AnalyticSolution solve_n_load(const SymmetricProfile& profile, int n, const MultiLoadOptions& opts) {
  if (n < 1) throw DomainError("solve_n_load needs n >= 1");
  if (n > 12) throw DomainError("solve_n_load supports at most 12 units");
  if (opts.multistarts < 1) throw DomainError("need at least one multistart");
  const double ymax = profile.y_max();
  const double r = ymax - kEpsFraction * ymax;

  Rng rng(opts.seed);
  bool have = false;
  Ascent best;
  int total_iterations = 0;
  for (int start = 0; start < opts.multistarts; ++start) {
    // Uniform point in {y >= 0, sum(y) <= r} via normalized exponentials.
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    double total = 0.0;
    for (double& v : e) {
      v = -std::log(1.0 - rng.uniform());
      total += v;
    }
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = r * e[static_cast<std::size_t>(i)] / total;

    Ascent run = ascend(profile, std::move(y), r, opts);
    total_iterations += run.iterations;
    std::sort(run.sizes.begin(), run.sizes.end());
    if (!have || run.area > best.area ||
        (run.area == best.area && run.sizes < best.sizes)) {
      best = std::move(run);
      have = true;
    }
  }
  if (!best.converged)
    throw NumericError("n-load gradient ascent reached max_iter without convergence");
  auto s = make_solution(profile, best.sizes, best.area);
  s.iterations = total_iterations;
  return s;
}

}  // namespace loadsizer::analytic
