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

#include "loadsizer/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "loadsizer/dispatch.hpp"
#include "loadsizer/error.hpp"

namespace loadsizer::milp {

namespace {

using Mask = std::uint32_t;  // bit i is unit i

struct StepSets {
  Mask on = 0;
  Mask avail = 0;  // on or free
};

void check_fixings(const MilpInstance& inst, const Fixings& fix) {
  if (fix.size() != inst.binaries())
    throw DomainError("fixings cover " + std::to_string(fix.size()) + " binaries, instance has " +
                      std::to_string(inst.binaries()));
}

std::vector<StepSets> step_sets(const MilpInstance& inst, const Fixings& fix) {
  const std::size_t T = inst.steps();
  std::vector<StepSets> sets(T);
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const Fix f = fix[i * T + t];
      if (f == Fix::on) sets[t].on |= Mask{1} << i;
      if (f != Fix::off) sets[t].avail |= Mask{1} << i;
    }
  }
  return sets;
}

double mask_sum(Mask m, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (m >> i & 1U) sum += x[i];
  return sum;
}

double total(std::span<const double> s) {
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum;
}

double tolerance(const MilpInstance& inst) { return 1e-9 * std::max(1.0, total(inst.s)); }

// Projected LP over x and one epigraph variable per distinct available set.
// Without a target it maximizes captured energy; with one it minimizes sum(x)
// subject to capturing at least the target.
lp::Result solve_projected(const MilpInstance& inst, const std::vector<StepSets>& sets,
                           std::optional<double> target) {
  const std::size_t n = inst.n;
  std::map<Mask, double> on_cap;
  std::map<Mask, std::vector<double>> groups;
  for (std::size_t t = 0; t < inst.steps(); ++t) {
    const double s = inst.s[t];
    if (sets[t].on != 0) {
      auto [it, fresh] = on_cap.emplace(sets[t].on, s);
      if (!fresh) it->second = std::min(it->second, s);
    }
    if (s > 0.0 && sets[t].avail != 0) groups[sets[t].avail].push_back(s);
  }

  const std::size_t cols = n + groups.size();
  lp::Problem p(cols);
  if (target) {
    for (std::size_t i = 0; i < n; ++i) p.set_objective(i, 1.0);
  } else {
    for (std::size_t g = 0; g < groups.size(); ++g) p.set_objective(n + g, -1.0);
  }

  std::size_t g = 0;
  for (auto& [mask, values] : groups) {
    std::sort(values.begin(), values.end());
    const auto cap_it = on_cap.find(mask);
    const double cap = cap_it == on_cap.end() ? std::numeric_limits<double>::infinity() : cap_it->second;
    // Pieces of X -> sum_t min(s_t, X); those past the cap are dominated.
    const std::size_t K = values.size();
    const auto reachable =
        static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), cap) - values.begin());
    double below = 0.0;
    for (std::size_t k = 0; k <= reachable; ++k) {
      std::vector<double> row(cols, 0.0);
      row[n + g] = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1U) row[i] = -static_cast<double>(K - k);
      p.add_row(std::move(row), lp::Sense::le, below);
      if (k < K) below += values[k];
    }
    ++g;
  }
  for (const auto& [mask, cap] : on_cap) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) row[i] = 1.0;
    p.add_row(std::move(row), lp::Sense::le, cap);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(cols, 0.0);
    row[i] = 1.0;
    p.add_row(std::move(row), lp::Sense::le, inst.big_m);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> row(cols, 0.0);
    row[i] = -1.0;
    row[i + 1] = 1.0;
    p.add_row(std::move(row), lp::Sense::le, 0.0);
  }
  if (target) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t k = n; k < cols; ++k) row[k] = 1.0;
    p.add_row(std::move(row), lp::Sense::ge, *target);
  }
  return lp::solve(p);
}

// Splits min(s_t, available sum) over the units for a given x.
Relaxation expand(const MilpInstance& inst, const Fixings& fix, const std::vector<StepSets>& sets,
                  const lp::Result& res) {
  const std::size_t n = inst.n, T = inst.steps();
  Relaxation r;
  r.status = res.status;
  r.x.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
  r.y.assign(n * T, 0.0);
  r.u.assign(n * T, 0.0);
  double captured = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const StepSets st = sets[t];
    const double on_sum = mask_sum(st.on, r.x);
    const double z = inst.s[t] > 0.0 ? std::min(inst.s[t], mask_sum(st.avail, r.x)) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (fix[i * T + t] == Fix::on) {
        r.y[i * T + t] = r.x[i];
        r.u[i * T + t] = 1.0;
      }
    }
    double rest = std::max(0.0, z - on_sum);
    captured += std::min(z, on_sum + rest);
    const Mask free = st.avail & ~st.on;
    if (rest <= 0.0 || free == 0) continue;
    std::vector<std::size_t> units;
    std::vector<double> sizes;
    for (std::size_t i = 0; i < n; ++i) {
      if (free >> i & 1U) {
        units.push_back(i);
        sizes.push_back(r.x[i]);
      }
    }
    // Whole units first, as large a subset as fits; then one partial unit.
    const Combo pick = dispatch::Dispatcher(sizes).best(rest);
    for (std::size_t k = 0; k < units.size(); ++k) {
      if (!unit_on(pick, units.size(), k) || !(sizes[k] > 0.0)) continue;
      r.y[units[k] * T + t] = sizes[k];
      r.u[units[k] * T + t] = 1.0;
      rest -= sizes[k];
    }
    for (std::size_t k = 0; k < units.size() && rest > 1e-12; ++k) {
      const std::size_t idx = units[k] * T + t;
      if (r.u[idx] == 1.0 || !(sizes[k] > 0.0)) continue;
      const double take = std::min(sizes[k], rest);
      r.y[idx] = take;
      r.u[idx] = take / sizes[k];
      rest -= take;
    }
  }
  r.objective_lb = std::max(0.0, total(inst.s) - captured);
  return r;
}

Fixings fix_schedule(const MilpInstance& inst, std::span<const std::uint8_t> u) {
  Fixings fix(inst.binaries());
  for (std::size_t k = 0; k < fix.size(); ++k) fix[k] = u[k] != 0 ? Fix::on : Fix::off;
  return fix;
}

struct Incumbent {
  bool valid = false;
  std::vector<std::uint8_t> u;
  ScheduleValue value;
};

class Search {
 public:
  Search(const MilpInstance& inst, const Options& opts) : inst_(inst), opts_(opts), tol_(tolerance(inst)) {}

  MilpSolution run();

 private:
  struct Node {
    Fixings fix;
    double priority = 0.0;
    std::size_t depth = 0;
    std::size_t seq = 0;
  };
  // Heap order: lower bound first, then deeper, then older.
  static bool after(const Node& a, const Node& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }

  void offer(std::vector<std::uint8_t> u);
  void offer_dispatch(std::span<const double> x);
  void root_heuristic();
  std::vector<double> coordinate_ascent(std::vector<double> x) const;

  const MilpInstance& inst_;
  const Options& opts_;
  double tol_;
  Incumbent best_;
  std::vector<double> kept_;  // s_t > 0, ascending
};

void Search::offer(std::vector<std::uint8_t> u) {
  ScheduleValue v = evaluate_schedule(inst_, u);
  const bool better = !best_.valid || v.objective < best_.value.objective - tol_ ||
                      (v.objective <= best_.value.objective + tol_ && v.sum_x < best_.value.sum_x - tol_);
  if (better) {
    best_.valid = true;
    best_.u = std::move(u);
    best_.value = std::move(v);
  }
}

void Search::offer_dispatch(std::span<const double> x) {
  const std::size_t n = inst_.n, T = inst_.steps();
  const dispatch::Dispatcher d(x);
  std::vector<std::uint8_t> u(n * T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    if (!(inst_.s[t] > 0.0)) continue;
    const Combo c = d.best(inst_.s[t]);
    for (std::size_t i = 0; i < n; ++i) u[i * T + t] = unit_on(c, n, i) ? 1 : 0;
  }
  offer(std::move(u));
}

// Coordinate moves to breakpoints: captured energy as a function of one size
// is piecewise increasing, with drops where a level containing it passes a
// sample, so the best value sits at s_t minus a subset sum of the others.
std::vector<double> Search::coordinate_ascent(std::vector<double> x) const {
  const std::size_t n = x.size();
  std::vector<double> values = kept_;
  values.erase(std::unique(values.begin(), values.end()), values.end());
  constexpr std::size_t kMaxBreakpoints = 256;
  if (values.size() > kMaxBreakpoints) {
    std::vector<double> thinned;
    for (std::size_t j = 1; j <= kMaxBreakpoints; ++j)
      thinned.push_back(values[j * values.size() / kMaxBreakpoints - 1]);
    values = std::move(thinned);
  }
  double best = dispatch::captured_energy_sorted(kept_, x);
  for (int pass = 0; pass < 30; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(x[j]);
      std::vector<double> sums{0.0};
      for (double o : others) {
        const std::size_t k = sums.size();
        for (std::size_t q = 0; q < k; ++q) sums.push_back(sums[q] + o);
      }
      std::vector<double> cands;
      for (double v : values)
        for (double l : sums)
          if (v - l > 1e-12 && v - l <= inst_.big_m) cands.push_back(v - l);
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
      double chosen = x[i];
      for (double c : cands) {
        std::vector<double> trial = x;
        trial[i] = c;
        const double value = dispatch::captured_energy_sorted(kept_, trial);
        if (value > best + tol_) {
          best = value;
          chosen = c;
        }
      }
      if (chosen != x[i]) {
        x[i] = chosen;
        improved = true;
      }
    }
    if (!improved) break;
  }
  std::sort(x.begin(), x.end(), std::greater<>());
  return x;
}

void Search::root_heuristic() {
  const std::size_t n = inst_.n;
  if (kept_.empty()) return;
  const double peak = *std::max_element(kept_.begin(), kept_.end());
  std::vector<double> seed;
  double seed_value = -1.0;
  for (int k = 5; k <= 10; ++k) {
    std::vector<double> x(n);
    const double unit = 0.1 * k * peak / static_cast<double>(combo_count(n) - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = unit * static_cast<double>(Combo{1} << (n - 1 - i));
    const double v = dispatch::captured_energy_sorted(kept_, x);
    offer_dispatch(x);
    if (v > seed_value) {
      seed_value = v;
      seed = std::move(x);
    }
  }
  if (n <= 8) offer_dispatch(coordinate_ascent(seed));
}

MilpSolution Search::run() {
  const std::size_t n = inst_.n, T = inst_.steps();
  for (double v : inst_.s)
    if (v > 0.0) kept_.push_back(v);
  std::sort(kept_.begin(), kept_.end());
  const double s_total = total(inst_.s);

  Fixings root(inst_.binaries(), Fix::free);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < T; ++t)
      if (!(inst_.s[t] > 0.0)) root[i * T + t] = Fix::off;

  root_heuristic();
  if (!best_.valid) offer(std::vector<std::uint8_t>(inst_.binaries(), 0));

  std::vector<Node> heap;
  heap.push_back(Node{std::move(root), 0.0, 0, 0});
  std::size_t seq = 1;
  std::size_t nodes = 0;
  Status status = Status::optimal;

  while (!heap.empty()) {
    const double incumbent = best_.value.objective;
    if (opts_.gap_tol > 0.0) {
      const double gap = (incumbent - heap.front().priority) / std::max(1e-9, incumbent);
      if (gap <= opts_.gap_tol) {
        status = Status::gap_limit;
        break;
      }
    }
    if (nodes >= opts_.node_limit) {
      status = Status::node_limit;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), after);
    Node node = std::move(heap.back());
    heap.pop_back();
    ++nodes;

    const auto sets = step_sets(inst_, node.fix);
    const lp::Result res = solve_projected(inst_, sets, std::nullopt);
    if (res.status != lp::Status::optimal) {
      if (opts_.on_node) opts_.on_node(node.fix, std::numeric_limits<double>::infinity());
      continue;
    }
    Relaxation relax = expand(inst_, node.fix, sets, res);
    const double bound = relax.objective_lb;
    if (opts_.on_node) opts_.on_node(node.fix, bound);
    if (bound > best_.value.objective + tol_) continue;

    offer_dispatch(relax.x);

    if (bound >= best_.value.objective - tol_) {
      // Equal-objective zone: only worth exploring for a smaller sum(x).
      const double target = s_total - best_.value.objective - tol_;
      const lp::Result second = solve_projected(inst_, sets, target);
      if (second.status != lp::Status::optimal || second.objective >= best_.value.sum_x - tol_) continue;
      relax = expand(inst_, node.fix, sets, second);
    }

    std::size_t branch = inst_.binaries();
    double most = 1e-9;
    for (std::size_t k = 0; k < node.fix.size(); ++k) {
      if (node.fix[k] != Fix::free) continue;
      const double frac = std::min(relax.u[k], 1.0 - relax.u[k]);
      if (frac > most) {
        most = frac;
        branch = k;
      }
    }
    if (branch == inst_.binaries()) {
      std::vector<std::uint8_t> u(inst_.binaries());
      for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = node.fix[k] == Fix::on || (node.fix[k] == Fix::free && relax.u[k] > 0.5) ? 1 : 0;
      offer(std::move(u));
      continue;
    }
    for (Fix f : {Fix::on, Fix::off}) {
      Node child{node.fix, bound, node.depth + 1, seq++};
      child.fix[branch] = f;
      heap.push_back(std::move(child));
      std::push_heap(heap.begin(), heap.end(), after);
    }
  }

  MilpSolution sol;
  sol.u = best_.u;
  sol.x = best_.value.x;
  sol.objective = best_.value.objective;
  sol.nodes_explored = nodes;
  sol.status = status;
  sol.bound = heap.empty() ? sol.objective : std::min(sol.objective, heap.front().priority);
  sol.gap = std::max(0.0, sol.objective - sol.bound) / std::max(1e-9, sol.objective);
  sol.y.assign(inst_.binaries(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < T; ++t)
      if (sol.u[i * T + t]) sol.y[i * T + t] = sol.x[i];
  sol.captured = s_total - sol.objective;
  return sol;
}

}  // namespace

MilpInstance build_instance(std::span<const double> s, std::size_t n, double big_m, bool tighten) {
  if (s.empty()) throw DomainError("MILP instance needs at least one sample");
  if (n < 1 || n > kMaxEnumeratedUnits) throw DomainError("MILP needs 1 <= n <= 20");
  double peak = 0.0;
  for (double v : s) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("MILP samples must be finite and >= 0");
    peak = std::max(peak, v);
  }
  if (!(big_m >= peak))
    throw DomainError("big-M " + std::to_string(big_m) + " is below max(s) = " + std::to_string(peak));
  MilpInstance inst;
  inst.s.assign(s.begin(), s.end());
  inst.n = n;
  inst.big_m = tighten ? peak : big_m;
  return inst;
}

Relaxation solve_lp_relaxation(const MilpInstance& inst, const Fixings& fix) {
  check_fixings(inst, fix);
  const std::size_t n = inst.n, T = inst.steps(), nt = n * T;
  const double M = inst.big_m;
  const std::size_t cols = n + 2 * nt;
  auto xcol = [](std::size_t i) { return i; };
  auto ycol = [&](std::size_t k) { return n + k; };
  auto ucol = [&](std::size_t k) { return n + nt + k; };

  lp::Problem p(cols);
  for (std::size_t k = 0; k < nt; ++k) p.set_objective(ycol(k), -1.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[ycol(i * T + t)] = 1.0;
    p.add_row(std::move(row), lp::Sense::le, inst.s[t]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t k = i * T + t;
      std::vector<double> a(cols, 0.0);
      a[ycol(k)] = 1.0;
      a[ucol(k)] = -M;
      p.add_row(a, lp::Sense::le, 0.0);  // y <= M u
      std::vector<double> b(cols, 0.0);
      b[ycol(k)] = 1.0;
      b[xcol(i)] = -1.0;
      p.add_row(b, lp::Sense::le, 0.0);  // y <= x
      std::vector<double> c(cols, 0.0);
      c[xcol(i)] = 1.0;
      c[ycol(k)] = -1.0;
      c[ucol(k)] = M;
      p.add_row(c, lp::Sense::le, M);  // y >= x + (u - 1) M
      std::vector<double> d(cols, 0.0);
      d[ucol(k)] = 1.0;
      const Fix f = fix[k];
      p.add_row(d, f == Fix::on ? lp::Sense::eq : lp::Sense::le, f == Fix::off ? 0.0 : 1.0);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> row(cols, 0.0);
    row[xcol(i)] = -1.0;
    row[xcol(i + 1)] = 1.0;
    p.add_row(std::move(row), lp::Sense::le, 0.0);
  }

  const lp::Result res = lp::solve(p);
  Relaxation r;
  r.status = res.status;
  if (res.status == lp::Status::unbounded)
    throw DomainError("MILP relaxation is unbounded; big-M formulation is invalid");
  if (res.status != lp::Status::optimal) return r;
  r.x.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
  r.y.assign(res.x.begin() + static_cast<std::ptrdiff_t>(n),
             res.x.begin() + static_cast<std::ptrdiff_t>(n + nt));
  r.u.assign(res.x.begin() + static_cast<std::ptrdiff_t>(n + nt), res.x.end());
  r.objective_lb = total(inst.s) + res.objective;
  return r;
}

Relaxation solve_projected_relaxation(const MilpInstance& inst, const Fixings& fix) {
  check_fixings(inst, fix);
  const auto sets = step_sets(inst, fix);
  const lp::Result res = solve_projected(inst, sets, std::nullopt);
  if (res.status != lp::Status::optimal) {
    Relaxation r;
    r.status = res.status;
    return r;
  }
  return expand(inst, fix, sets, res);
}

ScheduleValue evaluate_schedule(const MilpInstance& inst, std::span<const std::uint8_t> u) {
  if (u.size() != inst.binaries()) throw DomainError("schedule size does not match the instance");
  const Fixings fix = fix_schedule(inst, u);
  const auto sets = step_sets(inst, fix);
  const lp::Result first = solve_projected(inst, sets, std::nullopt);
  if (first.status != lp::Status::optimal) throw NumericError("schedule LP did not solve");
  const double captured = -first.objective;
  const lp::Result second =
      solve_projected(inst, sets, captured - 1e-12 * std::max(1.0, captured));
  const lp::Result& use = second.status == lp::Status::optimal ? second : first;

  ScheduleValue v;
  v.x.assign(use.x.begin(), use.x.begin() + static_cast<std::ptrdiff_t>(inst.n));
  double got = 0.0;
  for (std::size_t t = 0; t < inst.steps(); ++t)
    if (inst.s[t] > 0.0) got += mask_sum(sets[t].on, v.x);
  v.objective = total(inst.s) - got;
  for (double xi : v.x) v.sum_x += xi;
  return v;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::gap_limit: return "gap_limit";
    case Status::node_limit: return "node_limit";
  }
  return "unknown";
}

MilpSolution branch_and_bound(const MilpInstance& instance, const Options& opts) {
  if (!(opts.gap_tol >= 0.0)) throw DomainError("gap tolerance must be >= 0");
  return Search(instance, opts).run();
}

std::vector<SweepRow> downsample_sweep(const timeseries::SortedSeries& sorted, std::size_t n,
                                       std::span<const std::size_t> ratios, const SweepOptions& opts) {
  std::vector<SweepRow> rows;
  for (std::size_t ratio : ratios) {
    const auto start = std::chrono::steady_clock::now();
    const auto reduced = timeseries::downsample_uniform(sorted, ratio);
    const MilpInstance inst = build_instance(reduced.values, n, opts.big_m, opts.tighten);
    const MilpSolution sol = branch_and_bound(inst, opts.bnb);
    const auto stop = std::chrono::steady_clock::now();
    SweepRow row;
    row.ratio = ratio;
    row.samples = reduced.size();
    row.x = sol.x;
    row.objective = sol.objective;
    row.solar_utilization = dispatch::solar_utilization(sorted.values, sol.x);
    row.runtime_seconds = std::chrono::duration<double>(stop - start).count();
    row.nodes = sol.nodes_explored;
    row.status = sol.status;
    row.gap = sol.gap;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace loadsizer::milp
