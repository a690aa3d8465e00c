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

#include "loadsizer/active_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loadsizer/error.hpp"

namespace loadsizer::qp {

namespace {

bool independent_of(const Eigen::MatrixXd& A, const std::vector<Eigen::Index>& w, Eigen::Index row) {
  Eigen::MatrixXd stack(static_cast<Eigen::Index>(w.size()) + 1, A.cols());
  for (std::size_t k = 0; k < w.size(); ++k) stack.row(static_cast<Eigen::Index>(k)) = A.row(w[k]);
  stack.row(stack.rows() - 1) = A.row(row);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(stack);
  return lu.rank() == stack.rows();
}

std::string describe(const std::vector<Eigen::Index>& w) {
  std::string s = "{";
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k > 0) s += ",";
    s += std::to_string(w[k]);
  }
  return s + "}";
}

}  // namespace

Solution solve(const Problem& p, const Eigen::VectorXd& x0, const Options& opts) {
  const Eigen::Index n = p.H.rows();
  const Eigen::Index m = p.A.rows();
  if (p.H.cols() != n || p.g.size() != n || x0.size() != n || (m > 0 && p.A.cols() != n) ||
      p.b.size() != m)
    throw DomainError("QP dimensions are inconsistent");

  const double scale = std::max({1.0, p.H.lpNorm<Eigen::Infinity>(), p.g.lpNorm<Eigen::Infinity>()});
  const double feas_tol = 1e-9 * std::max(1.0, p.b.size() > 0 ? p.b.lpNorm<Eigen::Infinity>() : 1.0);
  if (m > 0 && ((p.A * x0 - p.b).maxCoeff() > feas_tol))
    throw DomainError("QP start point is infeasible");

  Eigen::VectorXd x = x0;
  std::vector<Eigen::Index> work;
  for (Eigen::Index i = 0; i < m && static_cast<Eigen::Index>(work.size()) < n; ++i) {
    if (std::abs(p.A.row(i).dot(x) - p.b(i)) <= feas_tol && independent_of(p.A, work, i))
      work.push_back(i);
  }

  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * (m + n) + 50);
  Solution out;
  Eigen::VectorXd mu;
  for (int iter = 0;; ++iter) {
    if (iter >= max_iter)
      throw NumericError("active-set QP hit its iteration bound; working set " + describe(work));
    out.iterations = iter;
    const auto w = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + w, n + w);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + w);
    kkt.topLeftCorner(n, n) = p.H;
    for (Eigen::Index k = 0; k < w; ++k) {
      kkt.block(0, n + k, n, 1) = p.A.row(work[static_cast<std::size_t>(k)]).transpose();
      kkt.block(n + k, 0, 1, n) = p.A.row(work[static_cast<std::size_t>(k)]);
    }
    rhs.head(n) = p.g - p.H * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < n + w)
      throw NumericError("active-set QP subproblem is singular; working set " + describe(work));
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd step = sol.head(n);
    mu = sol.tail(w);

    if (step.lpNorm<Eigen::Infinity>() <= opts.tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      Eigen::Index drop = -1;
      double most_negative = -opts.tol * scale;
      for (Eigen::Index k = 0; k < w; ++k) {
        if (mu(k) < most_negative) {
          most_negative = mu(k);
          drop = k;
        }
      }
      if (drop < 0) break;
      work.erase(work.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const double ap = p.A.row(i).dot(step);
      if (ap <= 1e-14 * std::max(1.0, step.lpNorm<Eigen::Infinity>())) continue;
      const double ratio = std::max(0.0, p.b(i) - p.A.row(i).dot(x)) / ap;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    x += alpha * step;
    if (blocking >= 0) work.push_back(blocking);
  }

  out.x = x;
  out.multipliers = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < work.size(); ++k) out.multipliers(work[k]) = mu(static_cast<Eigen::Index>(k));
  out.working_set = work;
  Eigen::VectorXd grad = p.H * x - p.g;
  if (m > 0) grad += p.A.transpose() * out.multipliers;
  out.stationarity = grad.lpNorm<Eigen::Infinity>();
  out.max_violation = m > 0 ? std::max(0.0, (p.A * x - p.b).maxCoeff()) : 0.0;
  return out;
}

}  // namespace loadsizer::qp
