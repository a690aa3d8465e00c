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

#include <optional>
#include <string>

#include "loadsizer/timeseries.hpp"

namespace loadsizer::timeseries {

// Symmetric clear-day model in normalized power units, time in samples with
// the peak at t = 0:
//
//   forward   y(t) = a * sin(b t + c)
//   inverse   t(y) = alpha * asin(beta y) + gamma      (rising branch, t <= 0)
//
// with alpha = 1/b, beta = 1/a and gamma = -c/b, which makes the inverse exact
// on the rising branch. A quadratic p1 t^2 + p2 t + p3 fit of the same data is
// kept for reference.
struct ClearSkyModel {
  struct Trig {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
  };
  struct Inverse {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
  };
  struct Quadratic {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;
  };

  Trig trig;
  Inverse inverse;
  std::optional<Quadratic> quadratic;
  double t_max = 0.0;  // positive zero crossing, samples
  double y_max = 0.0;  // peak value (= a)
  double residual_rms = 0.0;

  // Builds the model (inverse, t_max, y_max) from trig parameters alone.
  static ClearSkyModel from_trig(double a, double b, double c);

  double evaluate(double t) const;
};

// Rising-branch inverse. Throws DomainError unless 0 < y < y_max.
double model_inverse(const ClearSkyModel& model, double y);
// d t / d y of the rising-branch inverse: alpha beta / sqrt(1 - beta^2 y^2).
double model_inverse_derivative(const ClearSkyModel& model, double y);

// Fits the model to one single-peaked day. The time axis is shifted so the
// peak sample sits at t = 0 and only positive samples enter the fit.
// Throws FitError if Levenberg-Marquardt does not converge.
ClearSkyModel fit_clear_day(const PowerSeries& series);

std::string to_json(const ClearSkyModel& model);
ClearSkyModel clear_sky_from_json(const std::string& text);

}  // namespace loadsizer::timeseries
