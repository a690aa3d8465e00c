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

#include "loadsizer/clear_sky.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <vector>

#include "loadsizer/error.hpp"

namespace loadsizer::timeseries {

ClearSkyModel ClearSkyModel::from_trig(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("clear-sky model needs a > 0 and b > 0");
  ClearSkyModel m;
  m.trig = {a, b, c};
  m.inverse = {1.0 / b, 1.0 / a, -c / b};
  m.t_max = (std::numbers::pi - c) / b;
  m.y_max = a;
  return m;
}

double ClearSkyModel::evaluate(double t) const {
  return trig.a * std::sin(trig.b * t + trig.c);
}

double model_inverse(const ClearSkyModel& model, double y) {
  if (!(y > 0.0 && y < model.y_max))
    throw DomainError("inverse defined only on (0, y_max), got y = " + std::to_string(y));
  const auto& inv = model.inverse;
  return inv.alpha * std::asin(std::min(1.0, inv.beta * y)) + inv.gamma;
}

double model_inverse_derivative(const ClearSkyModel& model, double y) {
  if (!(y > 0.0 && y < model.y_max))
    throw DomainError("inverse derivative defined only on (0, y_max), got y = " +
                      std::to_string(y));
  const auto& inv = model.inverse;
  const double by = inv.beta * y;
  return inv.alpha * inv.beta / std::sqrt(1.0 - by * by);
}

namespace {

struct Samples {
  std::vector<double> t;
  std::vector<double> y;
};

double rms(const Eigen::VectorXd& r) {
  return r.size() ? std::sqrt(r.squaredNorm() / static_cast<double>(r.size())) : 0.0;
}

// Levenberg-Marquardt on y = a sin(b t + c).
ClearSkyModel::Trig fit_trig(const Samples& s, ClearSkyModel::Trig p, double& out_rms) {
  const auto n = static_cast<Eigen::Index>(s.t.size());
  auto residuals = [&](const ClearSkyModel::Trig& q) {
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) r[k] = q.a * std::sin(q.b * s.t[k] + q.c) - s.y[k];
    return r;
  };

  Eigen::VectorXd r = residuals(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    Eigen::MatrixXd jac(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double arg = p.b * s.t[k] + p.c;
      const double sn = std::sin(arg);
      const double cs = std::cos(arg);
      jac(k, 0) = sn;
      jac(k, 1) = p.a * s.t[k] * cs;
      jac(k, 2) = p.a * cs;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, cost)) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = damped.ldlt().solve(-grad);
      const ClearSkyModel::Trig trial{p.a + step[0], p.b + step[1], p.c + step[2]};
      const Eigen::VectorXd r_trial = residuals(trial);
      const double trial_cost = r_trial.squaredNorm();
      if (trial_cost <= cost) {
        const double rel_step = std::abs(step[0]) / std::max(1e-300, std::abs(p.a)) +
                                std::abs(step[1]) / std::max(1e-300, std::abs(p.b)) +
                                std::abs(step[2]) / std::max(1.0, std::abs(p.c));
        const double rel_cost = (cost - trial_cost) / std::max(1e-300, cost);
        p = trial;
        r = r_trial;
        cost = trial_cost;
        lambda = std::max(1e-12, lambda * 0.3);
        accepted = true;
        if (rel_step < 1e-13 || (rel_cost < 1e-15 && rel_step < 1e-9)) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) converged = true;  // no descent direction left: local minimum
  }
  out_rms = rms(r);
  if (!converged || !std::isfinite(cost) || !(p.a > 0.0) || !(p.b > 0.0))
    throw FitError("clear-day trigonometric fit did not converge", out_rms);
  return p;
}

ClearSkyModel::Quadratic fit_quadratic(const Samples& s) {
  const auto n = static_cast<Eigen::Index>(s.t.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    design(k, 0) = s.t[k] * s.t[k];
    design(k, 1) = s.t[k];
    design(k, 2) = 1.0;
    rhs[k] = s.y[k];
  }
  const Eigen::Vector3d p = design.colPivHouseholderQr().solve(rhs);
  return {p[0], p[1], p[2]};
}

}  // namespace

ClearSkyModel fit_clear_day(const PowerSeries& series) {
  const auto& v = series.power;
  if (v.empty()) throw DomainError("cannot fit an empty series");
  const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());

  Samples s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] <= 0.0) continue;
    s.t.push_back(static_cast<double>(k) - static_cast<double>(peak));
    s.y.push_back(v[k]);
  }
  if (s.t.size() < 3) throw DomainError("clear-day fit needs at least 3 positive samples");

  // Start from a half sine spanning the positive support.
  const double support = s.t.back() - s.t.front() + 1.0;
  ClearSkyModel::Trig guess{v[peak], std::numbers::pi / support, std::numbers::pi / 2};
  double fit_rms = 0.0;
  const auto trig = fit_trig(s, guess, fit_rms);

  ClearSkyModel model = ClearSkyModel::from_trig(trig.a, trig.b, trig.c);
  model.quadratic = fit_quadratic(s);
  model.residual_rms = fit_rms;
  return model;
}

std::string to_json(const ClearSkyModel& m) {
  nlohmann::ordered_json j;
  j["a"] = m.trig.a;
  j["b"] = m.trig.b;
  j["c"] = m.trig.c;
  j["alpha"] = m.inverse.alpha;
  j["beta"] = m.inverse.beta;
  j["gamma"] = m.inverse.gamma;
  const auto q = m.quadratic.value_or(ClearSkyModel::Quadratic{});
  j["p1"] = q.p1;
  j["p2"] = q.p2;
  j["p3"] = q.p3;
  j["t_max"] = m.t_max;
  j["y_max"] = m.y_max;
  return j.dump(2);
}

ClearSkyModel clear_sky_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("clear-sky model JSON: ") + e.what(), 0);
  }
  try {
    ClearSkyModel m = ClearSkyModel::from_trig(j.at("a").get<double>(), j.at("b").get<double>(),
                                               j.at("c").get<double>());
    if (j.contains("p1") && j.contains("p2") && j.contains("p3"))
      m.quadratic = ClearSkyModel::Quadratic{j["p1"].get<double>(), j["p2"].get<double>(),
                                             j["p3"].get<double>()};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("clear-sky model JSON: ") + e.what(), 0);
  }
}

}  // namespace loadsizer::timeseries
