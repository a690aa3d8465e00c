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
#include <vector>

namespace loadsizer::lp {

enum class Sense { le, ge, eq };

// minimize c'x  subject to  rows, x >= 0.
class Problem {
 public:
  explicit Problem(std::size_t cols) : cols_(cols), objective_(cols, 0.0) {}

  std::size_t cols() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return rhs_.size(); }

  void set_objective(std::size_t col, double c) { objective_.at(col) = c; }
  // Returns the row index. Coefficients are dense, size cols().
  std::size_t add_row(std::vector<double> coeffs, Sense sense, double rhs);

  const std::vector<double>& objective() const noexcept { return objective_; }
  const std::vector<double>& row(std::size_t r) const { return coeffs_[r]; }
  Sense sense(std::size_t r) const { return senses_[r]; }
  double rhs(std::size_t r) const { return rhs_[r]; }

 private:
  std::size_t cols_;
  std::vector<double> objective_;
  std::vector<std::vector<double>> coeffs_;
  std::vector<Sense> senses_;
  std::vector<double> rhs_;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
  bool used_bland = false;
};

struct Options {
  double tol = 1e-9;
  int max_iter = 0;           // 0 picks 50 * (rows + cols) + 1000
  int degenerate_limit = 50;  // consecutive degenerate pivots before Bland
};

// Dense two-phase tableau simplex. Dantzig pricing, switching permanently to
// Bland's rule after a run of degenerate pivots.
Result solve(const Problem& p, const Options& opts = {});

}  // namespace loadsizer::lp
