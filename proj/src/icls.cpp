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

#include "loadsizer/icls.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "loadsizer/active_set.hpp"
#include "loadsizer/dispatch.hpp"
#include "loadsizer/error.hpp"
#include "loadsizer/rng.hpp"

namespace loadsizer::icls {

namespace {

std::size_t blocks_for(std::size_t n) {
  if (n < 1 || n > 12) throw DomainError("ICLS needs 1 <= n <= 12");
  return combo_count(n) - 1;
}

void validate(const SwitchTimes& m, std::size_t n) {
  const std::size_t blocks = blocks_for(n);
  if (m.m.size() + 1 != blocks)
    throw DomainError("switch times need " + std::to_string(blocks - 1) + " entries, got " +
                      std::to_string(m.m.size()));
  std::size_t used = m.off;
  for (std::size_t v : m.m) {
    if (v < 1) throw DomainError("every switch-time block needs at least one row");
    used += v;
  }
  if (used >= m.total)
    throw DomainError("switch-time blocks use " + std::to_string(used) + " of " +
                      std::to_string(m.total) + " rows; the last block would be empty");
}

// Per-series data reused across many fixed-m solves.
class FixedMSolver {
 public:
  FixedMSolver(const timeseries::SortedSeries& sorted, std::size_t n)
      : s_(sorted.values), n_(n), blocks_(blocks_for(n)) {
    prefix_.assign(s_.size() + 1, 0.0);
    prefix_sq_.assign(s_.size() + 1, 0.0);
    for (std::size_t t = 0; t < s_.size(); ++t) {
      prefix_[t + 1] = prefix_[t] + s_[t];
      prefix_sq_[t + 1] = prefix_sq_[t] + s_[t] * s_[t];
    }
    // Row of code d in incremental coordinates: a[j] = number of units 0..j on.
    rows_.resize(blocks_, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
    for (std::size_t k = 0; k < blocks_; ++k) {
      const Combo d = static_cast<Combo>(k + 1);
      double on = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (unit_on(d, n, j)) on += 1.0;
        rows_[k](static_cast<Eigen::Index>(j)) = on;
      }
    }
  }

  IclsResult solve(const SwitchTimes& m) const {
    validate(m, n_);
    if (m.total != s_.size())
      throw DomainError("switch times cover " + std::to_string(m.total) + " rows but the series has " +
                        std::to_string(s_.size()));
    const auto n = static_cast<Eigen::Index>(n_);
    const auto nb = static_cast<Eigen::Index>(blocks_);
    qp::Problem p;
    p.H = Eigen::MatrixXd::Zero(n, n);
    p.g = Eigen::VectorXd::Zero(n);
    p.A = Eigen::MatrixXd::Zero(n + nb, n);
    p.b = Eigen::VectorXd::Zero(n + nb);
    for (Eigen::Index j = 0; j < n; ++j) p.A(j, j) = -1.0;

    std::size_t start = m.off;
    for (std::size_t k = 0; k < blocks_; ++k) {
      const std::size_t len = k + 1 < blocks_ ? m.m[k] : m.total - start;
      const auto& a = rows_[k];
      p.H += static_cast<double>(len) * a * a.transpose();
      p.g += (prefix_[start + len] - prefix_[start]) * a;
      // Sorted ascending, so the block minimum is its first sample.
      p.A.row(n + static_cast<Eigen::Index>(k)) = a.transpose();
      p.b(n + static_cast<Eigen::Index>(k)) = s_[start];
      start += len;
    }

    const qp::Solution sol = qp::solve(p, Eigen::VectorXd::Zero(n));

    IclsResult r;
    r.m = m;
    r.x_bar.assign(sol.x.data(), sol.x.data() + n);
    r.x.assign(n_, 0.0);
    double tail = 0.0;
    for (std::size_t j = n_; j-- > 0;) {
      tail += r.x_bar[j];
      r.x[j] = tail;
    }
    const double sq = prefix_sq_.back() - 2.0 * p.g.dot(sol.x) + sol.x.dot(p.H * sol.x);
    r.residual_norm = std::sqrt(std::max(0.0, sq));
    r.min_multiplier = sol.multipliers.size() > 0 ? sol.multipliers.minCoeff() : 0.0;
    r.stationarity = sol.stationarity;
    r.max_violation = sol.max_violation;
    r.solar_utilization = s_.empty() ? 0.0 : dispatch::solar_utilization_sorted(s_, r.x);
    return r;
  }

 private:
  const std::vector<double>& s_;
  std::size_t n_;
  std::size_t blocks_;
  std::vector<double> prefix_;
  std::vector<double> prefix_sq_;
  std::vector<Eigen::VectorXd> rows_;
};

// Higher SU first, then lower residual.
bool improves(const IclsResult& a, const IclsResult& b) {
  if (a.solar_utilization != b.solar_utilization) return a.solar_utilization > b.solar_utilization;
  return a.residual_norm < b.residual_norm;
}

// As improves, with the smaller m breaking exact ties.
bool ranks_before(const IclsResult& a, const IclsResult& b) {
  if (improves(a, b)) return true;
  if (improves(b, a)) return false;
  if (a.m.off != b.m.off) return a.m.off < b.m.off;
  return a.m.m < b.m.m;
}

class Evaluator {
 public:
  Evaluator(const timeseries::SortedSeries& sorted, std::size_t n) : solver_(sorted, n) {}

  const IclsResult& operator()(const SwitchTimes& m) {
    auto key = std::make_pair(m.off, m.m);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(std::move(key), solver_.solve(m)).first;
    return it->second;
  }

 private:
  FixedMSolver solver_;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, IclsResult> cache_;
};

template <typename Visit>
void for_each_switch_times(std::size_t total, std::size_t n, bool search_off, Visit&& visit) {
  const std::size_t free = blocks_for(n) - 1;
  const std::size_t blocks = free + 1;
  SwitchTimes m;
  m.total = total;
  m.m.assign(free, 1);
  // Odometer over compositions with off + sum(m) <= total - 1.
  auto recurse = [&](auto&& self, std::size_t k, std::size_t remaining) -> void {
    if (k == free) {
      visit(m);
      return;
    }
    const std::size_t later = free - k - 1;
    for (std::size_t v = 1; v + later <= remaining; ++v) {
      m.m[k] = v;
      self(self, k + 1, remaining - v);
    }
  };
  const std::size_t max_off = search_off && total >= blocks ? total - blocks : 0;
  for (std::size_t off = 0; off <= max_off; ++off) {
    m.off = off;
    recurse(recurse, 0, total - off - 1);
  }
}

IclsResult local_search(Evaluator& eval, SwitchTimes current, int max_iter, bool search_off) {
  IclsResult best = eval(current);
  const std::size_t total = current.total;
  auto used_rows = [](const SwitchTimes& m) {
    return std::accumulate(m.m.begin(), m.m.end(), m.off);
  };
  std::size_t used = used_rows(current);
  std::size_t step = std::max<std::size_t>(1, total / 16);
  // Coordinate k < size() moves m_k; k == size() moves the off prefix.
  const std::size_t coords = current.m.size() + (search_off ? 1 : 0);
  int moves = 0;
  while (moves < max_iter) {
    bool found = false;
    SwitchTimes chosen;
    IclsResult chosen_result;
    for (std::size_t k = 0; k < coords; ++k) {
      for (int dir : {+1, -1}) {
        SwitchTimes cand = current;
        std::size_t& v = k < cand.m.size() ? cand.m[k] : cand.off;
        const std::size_t floor = k < cand.m.size() ? 1 : 0;
        if (dir > 0) {
          if (used + step > total - 1) continue;
          v += step;
        } else {
          if (v < floor + step) continue;
          v -= step;
        }
        const IclsResult& r = eval(cand);
        if (improves(r, found ? chosen_result : best)) {
          chosen = std::move(cand);
          chosen_result = r;
          found = true;
        }
      }
    }
    if (found) {
      current = std::move(chosen);
      best = std::move(chosen_result);
      used = used_rows(current);
      ++moves;
    } else if (step > 1) {
      step /= 2;
    } else {
      break;
    }
  }
  return best;
}

}  // namespace

std::size_t SwitchTimes::last_block() const {
  const std::size_t used = std::accumulate(m.begin(), m.end(), off);
  return used < total ? total - used : 0;
}

std::vector<Combo> build_um(const SwitchTimes& m, std::size_t n) {
  validate(m, n);
  std::vector<Combo> rows;
  rows.reserve(m.total);
  rows.insert(rows.end(), m.off, Combo{0});
  const std::size_t blocks = blocks_for(n);
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t len = k + 1 < blocks ? m.m[k] : m.last_block();
    rows.insert(rows.end(), len, static_cast<Combo>(k + 1));
  }
  return rows;
}

SwitchTimes equidistant(std::size_t total, std::size_t n) {
  const std::size_t blocks = blocks_for(n);
  if (total < blocks)
    throw DomainError("series of length " + std::to_string(total) + " is shorter than the " +
                      std::to_string(blocks) + " switch states");
  SwitchTimes m;
  m.total = total;
  m.m.assign(blocks - 1, total / blocks);
  return m;
}

IclsResult solve_icls_fixed_m(const timeseries::SortedSeries& sorted, const SwitchTimes& m,
                              std::size_t n) {
  return FixedMSolver(sorted, n).solve(m);
}

std::uint64_t count_switch_times(std::size_t total, std::size_t n, bool search_off) {
  const std::size_t blocks = blocks_for(n);
  if (total < blocks) return 0;
  // C(total - 1, blocks - 1) compositions; summing over the off prefix gives
  // C(total, blocks).
  const std::uint64_t top = search_off ? total : total - 1;
  std::uint64_t k = search_off ? blocks : blocks - 1;
  if (k > top - k) k = top - k;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (top - k + i) / i;
    if (c > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(c);
}

IclsResult optimize_m(const timeseries::SortedSeries& sorted, std::size_t n, const IclsOptions& opts) {
  if (opts.restarts < 1) throw DomainError("ICLS needs at least one restart");
  const std::size_t total = sorted.size();
  const SwitchTimes first = equidistant(total, n);
  Evaluator eval(sorted, n);

  std::vector<SwitchTimes> starts;
  if (static_cast<std::uint64_t>(opts.restarts) >= count_switch_times(total, n, opts.search_off)) {
    for_each_switch_times(total, n, opts.search_off, [&](const SwitchTimes& m) { starts.push_back(m); });
  } else {
    starts.push_back(first);
    std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen{{first.off, first.m}};
    Rng rng(opts.seed);
    const std::size_t free = first.m.size();
    int attempts = 0;
    while (static_cast<int>(starts.size()) < opts.restarts && attempts < 100 * opts.restarts) {
      ++attempts;
      // Distinct cut points in [1, total - 1]; with the off prefix the first
      // block may also start anywhere in [0, total - 1].
      std::size_t off = 0;
      std::set<std::size_t> cuts;
      if (opts.search_off) {
        while (cuts.size() < free + 1) cuts.insert(static_cast<std::size_t>(rng.below(total)));
        off = *cuts.begin();
        cuts.erase(cuts.begin());
      } else {
        while (cuts.size() < free) cuts.insert(1 + static_cast<std::size_t>(rng.below(total - 1)));
      }
      SwitchTimes m;
      m.total = total;
      m.off = off;
      std::size_t prev = off;
      for (std::size_t c : cuts) {
        m.m.push_back(c - prev);
        prev = c;
      }
      if (seen.emplace(m.off, m.m).second) starts.push_back(std::move(m));
    }
  }

  bool have = false;
  IclsResult best;
  for (const SwitchTimes& start : starts) {
    IclsResult r = local_search(eval, start, opts.max_iter, opts.search_off);
    if (!have || ranks_before(r, best)) {
      best = std::move(r);
      have = true;
    }
  }
  best.restarts_used = static_cast<int>(starts.size());
  return best;
}

IclsResult enumerate_m(const timeseries::SortedSeries& sorted, std::size_t n, bool search_off) {
  const std::size_t total = sorted.size();
  equidistant(total, n);  // length check
  const FixedMSolver solver(sorted, n);
  bool have = false;
  IclsResult best;
  for_each_switch_times(total, n, search_off, [&](const SwitchTimes& m) {
    IclsResult r = solver.solve(m);
    if (!have || ranks_before(r, best)) {
      best = std::move(r);
      have = true;
    }
  });
  return best;
}

}  // namespace loadsizer::icls
