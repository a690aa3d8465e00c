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
#include <json.hpp>
#include <string>
#include <vector>

#include "loadsizer/analytic.hpp"
#include "loadsizer/ecls.hpp"
#include "loadsizer/icls.hpp"
#include "loadsizer/milp.hpp"

namespace loadsizer {

struct SizingResult {
  std::string method;
  std::size_t n = 0;
  std::vector<double> x;  // non-increasing, normalized
  double objective = 0.0;  // residual norm, mismatch or area, per method
  double solar_utilization = 0.0;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
  double runtime_seconds = 0.0;
  std::string error;  // set when the method failed

  bool ok() const noexcept { return error.empty(); }
};

SizingResult from_analytic(const analytic::AnalyticSolution& s);
SizingResult from_ecls(const ecls::EclsResult& r);
SizingResult from_icls(const icls::IclsResult& r);
SizingResult from_milp(const milp::MilpSolution& s, const milp::MilpInstance& instance);

// Power-valued entries are multiplied by scale (1 for normalized units).
nlohmann::ordered_json to_json(const SizingResult& r, double scale = 1.0);

// Fixed, locale-independent rendering used for every CSV cell.
std::string format_number(double v);

}  // namespace loadsizer
