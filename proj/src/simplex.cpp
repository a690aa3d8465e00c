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

#include "loadsizer/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "loadsizer/error.hpp"
#include "loadsizer/kernels.hpp"

namespace loadsizer::lp {

std::size_t Problem::add_row(std::vector<double> coeffs, Sense sense, double rhs) {
  if (coeffs.size() != cols_) throw DomainError("LP row has the wrong number of coefficients");
  if (!std::isfinite(rhs)) throw DomainError("LP right-hand side must be finite");
  coeffs_.push_back(std::move(coeffs));
  senses_.push_back(sense);
  rhs_.push_back(rhs);
  return rhs_.size() - 1;
}

namespace {

class Tableau {
 public:
  Tableau(const Problem& p, const Options& opts) : opts_(opts), m_(p.rows()), n_(p.cols()) {
    std::vector<Sense> sense(m_);
    std::vector<double> sign(m_, 1.0);
    std::size_t slacks = 0, artificials = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      sense[r] = p.sense(r);
      if (p.rhs(r) < 0.0) {
        sign[r] = -1.0;
        if (sense[r] == Sense::le) sense[r] = Sense::ge;
        else if (sense[r] == Sense::ge) sense[r] = Sense::le;
      }
      if (sense[r] != Sense::eq) ++slacks;
      if (sense[r] != Sense::le) ++artificials;
    }
    art_begin_ = n_ + slacks;
    width_ = art_begin_ + artificials + 1;
    data_.assign((m_ + 2) * width_, 0.0);
    basis_.assign(m_, 0);

    std::size_t slack = n_, art = art_begin_;
    for (std::size_t r = 0; r < m_; ++r) {
      double* row = row_ptr(r);
      const auto& coeffs = p.row(r);
      for (std::size_t j = 0; j < n_; ++j) row[j] = sign[r] * coeffs[j];
      row[width_ - 1] = sign[r] * p.rhs(r);
      if (sense[r] == Sense::le) {
        row[slack] = 1.0;
        basis_[r] = slack++;
      } else {
        if (sense[r] == Sense::ge) row[slack++] = -1.0;
        row[art] = 1.0;
        basis_[r] = art++;
      }
    }
    // Phase-2 reduced costs; basis starts on slacks and artificials, which cost 0.
    double* cost = row_ptr(m_);
    for (std::size_t j = 0; j < n_; ++j) cost[j] = p.objective()[j];
    // Phase-1 reduced costs for minimizing the sum of artificials.
    double* phase1 = row_ptr(m_ + 1);
    for (std::size_t j = art_begin_; j + 1 < width_; ++j) phase1[j] = 1.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] >= art_begin_) kernels::axpy(-1.0, row_span(r), row_span_mut(m_ + 1));

    max_iter_ = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(50 * (m_ + width_) + 1000);
  }

  bool has_artificials() const { return art_begin_ + 1 < width_; }

  // Returns false on iteration limit; sets unbounded_ when no ratio row exists.
  bool run(std::size_t objective_row, std::size_t allowed_cols) {
    while (true) {
      if (iterations_ >= max_iter_) return false;
      const double* z = row_ptr(objective_row);
      std::size_t enter = allowed_cols;
      double most_negative = -opts_.tol;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (z[j] < most_negative) {
          enter = j;
          if (bland_) break;
          most_negative = z[j];
        }
      }
      if (enter == allowed_cols) return true;

      std::size_t leave = m_;
      double best_ratio = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= opts_.tol) continue;
        const double ratio = at(r, width_ - 1) / a;
        if (leave == m_ || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave == m_) {
        unbounded_ = true;
        return true;
      }
      if (best_ratio <= opts_.tol) {
        if (++degenerate_run_ >= opts_.degenerate_limit) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }
      pivot(leave, enter);
      ++iterations_;
    }
  }

  double phase1_value() const { return -at(m_ + 1, width_ - 1); }

  // Pivots basic artificials out where possible. Rows that cannot be pivoted
  // are redundant and keep a zero-valued artificial.
  void expel_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < art_begin_) continue;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(at(r, j)) > opts_.tol) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  Result extract(const Problem& p, Status status) const {
    Result out;
    out.status = status;
    out.iterations = iterations_;
    out.used_bland = bland_;
    out.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) out.x[basis_[r]] = std::max(0.0, at(r, width_ - 1));
    for (std::size_t j = 0; j < n_; ++j) out.objective += p.objective()[j] * out.x[j];
    return out;
  }

  std::size_t art_begin() const { return art_begin_; }
  std::size_t cost_row() const { return m_; }
  std::size_t phase1_row() const { return m_ + 1; }
  bool unbounded() const { return unbounded_; }

 private:
  double* row_ptr(std::size_t r) { return data_.data() + r * width_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * width_; }
  std::span<const double> row_span(std::size_t r) const { return {row_ptr(r), width_}; }
  std::span<double> row_span_mut(std::size_t r) { return {row_ptr(r), width_}; }
  double at(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }

  void pivot(std::size_t leave, std::size_t enter) {
    double* prow = row_ptr(leave);
    const double inv = 1.0 / prow[enter];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (std::size_t r = 0; r < m_ + 2; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      kernels::axpy(-f, row_span(leave), row_span_mut(r));
      data_[r * width_ + enter] = 0.0;
    }
    basis_[leave] = enter;
  }

  Options opts_;
  std::size_t m_, n_;
  std::size_t art_begin_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  int iterations_ = 0;
  int max_iter_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
  bool unbounded_ = false;
};

}  // namespace

Result solve(const Problem& p, const Options& opts) {
  Tableau t(p, opts);
  if (t.has_artificials()) {
    if (!t.run(t.phase1_row(), t.art_begin())) return t.extract(p, Status::iteration_limit);
    double scale = 1.0;
    for (std::size_t r = 0; r < p.rows(); ++r) scale = std::max(scale, std::abs(p.rhs(r)));
    if (t.phase1_value() > 1e-7 * scale) return t.extract(p, Status::infeasible);
    t.expel_artificials();
  }
  if (!t.run(t.cost_row(), t.art_begin())) return t.extract(p, Status::iteration_limit);
  if (t.unbounded()) return t.extract(p, Status::unbounded);
  return t.extract(p, Status::optimal);
}

}  // namespace loadsizer::lp
