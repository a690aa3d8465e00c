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

#include "loadsizer/result.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace loadsizer {

namespace {

std::vector<double> non_increasing(std::vector<double> x) {
  std::sort(x.begin(), x.end(), std::greater<>());
  return x;
}

}  // namespace

SizingResult from_analytic(const analytic::AnalyticSolution& s) {
  SizingResult r;
  r.method = "analytic";
  r.n = s.sizes.size();
  r.x = non_increasing(s.sizes);
  r.objective = s.area;
  r.solar_utilization = s.solar_utilization;
  auto& d = r.diagnostics;
  d["area"] = s.area;
  d["total_energy"] = s.total_energy;
  d["model_solar_utilization"] = s.solar_utilization;
  d["levels"] = s.levels;
  d["switch_times"] = s.switch_times;
  d["switch_times_rounded"] = s.switch_times_rounded;
  d["iterations"] = s.iterations;
  return r;
}

SizingResult from_ecls(const ecls::EclsResult& e) {
  SizingResult r;
  r.method = "ecls";
  r.n = e.x.size();
  r.x = e.x;
  r.objective = e.residual_norm;
  r.solar_utilization = e.solar_utilization;
  auto& d = r.diagnostics;
  d["C"] = e.C;
  d["lambda"] = e.lambda;
  d["residual_norm"] = e.residual_norm;
  d["kkt_residual"] = e.kkt_residual;
  d["has_nonpositive"] = e.has_nonpositive;
  return r;
}

SizingResult from_icls(const icls::IclsResult& e) {
  SizingResult r;
  r.method = "icls";
  r.n = e.x.size();
  r.x = non_increasing(e.x);
  r.objective = e.residual_norm;
  r.solar_utilization = e.solar_utilization;
  auto& d = r.diagnostics;
  d["m"] = e.m.m;
  d["off"] = e.m.off;
  d["last_block"] = e.m.last_block();
  d["x_bar"] = e.x_bar;
  d["residual_norm"] = e.residual_norm;
  d["restarts_used"] = e.restarts_used;
  d["min_multiplier"] = e.min_multiplier;
  d["stationarity"] = e.stationarity;
  return r;
}

SizingResult from_milp(const milp::MilpSolution& s, const milp::MilpInstance& instance) {
  SizingResult r;
  r.method = "milp";
  r.n = s.x.size();
  r.x = non_increasing(s.x);
  r.objective = s.objective;
  auto& d = r.diagnostics;
  d["status"] = std::string(milp::status_name(s.status));
  d["objective"] = s.objective;
  d["bound"] = s.bound;
  d["gap"] = s.gap;
  d["nodes_explored"] = s.nodes_explored;
  d["samples"] = instance.steps();
  d["big_m"] = instance.big_m;
  d["binaries"] = instance.binaries();
  return r;
}

nlohmann::ordered_json to_json(const SizingResult& r, double scale) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["n"] = r.n;
  std::vector<double> x = r.x;
  for (double& v : x) v *= scale;
  j["x"] = x;
  j["objective"] = r.objective;
  j["solar_utilization"] = r.solar_utilization;
  j["diagnostics"] = r.diagnostics;
  j["runtime_seconds"] = r.runtime_seconds;
  if (!r.ok()) j["error"] = r.error;
  return j;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace loadsizer
