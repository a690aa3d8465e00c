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

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace loadsizer::qp {

// minimize 1/2 x'Hx - g'x  subject to  A x <= b, with H symmetric positive
// definite.
struct Problem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct Solution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per row of A, zero off the working set
  std::vector<Eigen::Index> working_set;
  double stationarity = 0.0;    // ||Hx - g + A'mu||_inf
  double max_violation = 0.0;   // max(Ax - b, 0)
  int iterations = 0;
};

struct Options {
  double tol = 1e-12;
  int max_iter = 0;  // 0 picks 10 * (rows + cols) + 50
};

// Primal active-set method started from a feasible point x0. The initial
// working set is every bound-type row active at x0 that keeps the set
// linearly independent. Each step solves the equality-constrained subproblem
// on the working set, stops at the first blocking constraint, and drops the
// most negative multiplier once the step vanishes.
Solution solve(const Problem& p, const Eigen::VectorXd& x0, const Options& opts = {});

}  // namespace loadsizer::qp
