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

// Writes the synthetic series bundled under data/. Deterministic for a given
// seed; rerun with the defaults to regenerate the committed files.
#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "loadsizer/clear_sky.hpp"
#include "loadsizer/result.hpp"
#include "loadsizer/rng.hpp"
#include "loadsizer/timeseries.hpp"

namespace {

namespace fs = std::filesystem;
using loadsizer::Rng;
using loadsizer::format_number;
using loadsizer::timeseries::format_timestamp;
using loadsizer::timeseries::parse_timestamp;
using loadsizer::timeseries::Timestamp;

constexpr double kRatedWatts = 100000.0;

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "timestamp,power_w\n";
  }
  void row(Timestamp t, double watts) { out_ << format_timestamp(t) << ',' << format_number(watts) << '\n'; }

 private:
  std::ofstream out_;
};

// One clear day sampled every 120 s from the reference trig model, peak at noon.
void clear_day(const fs::path& dir) {
  const auto model = loadsizer::timeseries::ClearSkyModel::from_trig(0.9903, 0.006952, 1.572);
  const Timestamp noon = *parse_timestamp("2025-06-21T12:00:00");
  const long half = std::lround(model.t_max);
  CsvWriter csv(dir / "clear_day.csv");
  for (long k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k);
    // Shift so the sample grid is centred on the model's crest.
    const double crest = (std::numbers::pi / 2 - model.trig.c) / model.trig.b;
    const double v = std::max(0.0, model.evaluate(t + crest));
    csv.row(noon + k * 120, v * kRatedWatts);
  }
}

enum class Sky { clear, scattered, overcast };

Sky next_sky(Sky prev, Rng& rng) {
  // Weather persists a little from one day to the next.
  const double u = rng.uniform();
  if (u < 0.4) return prev;
  const double v = rng.uniform();
  if (v < 0.55) return Sky::clear;
  if (v < 0.85) return Sky::scattered;
  return Sky::overcast;
}

void year(const fs::path& dir, std::uint64_t seed) {
  Rng rng(seed);
  const Timestamp start = *parse_timestamp("2025-01-01T00:00:00");
  constexpr int kStepsPerDay = 96;
  CsvWriter csv(dir / "year_15min.csv");
  Sky sky = Sky::clear;
  for (int day = 0; day < 365; ++day) {
    const double season = std::cos(2.0 * std::numbers::pi * (day - 171) / 365.0);
    const double daylight_h = 12.0 + 2.0 * season;
    const double peak = 0.86 + 0.12 * season;
    const double sunrise = 12.0 - daylight_h / 2;
    sky = next_sky(sky, rng);

    double level = sky == Sky::overcast ? rng.uniform(0.15, 0.45) : 1.0;
    double cloud = 1.0;
    for (int k = 0; k < kStepsPerDay; ++k) {
      const double hour = k * 0.25;
      const double phase = (hour - sunrise) / daylight_h;
      double v = 0.0;
      if (phase > 0.0 && phase < 1.0) {
        v = peak * std::pow(std::sin(std::numbers::pi * phase), 1.2);
        switch (sky) {
          case Sky::clear:
            v *= 1.0 - 0.02 * rng.uniform();
            break;
          case Sky::scattered:
            // Clouds drift in and out; a passing cloud cuts output sharply.
            cloud = std::clamp(cloud + rng.uniform(-0.25, 0.25), 0.2, 1.0);
            if (rng.uniform() < 0.15) cloud = rng.uniform(0.2, 0.6);
            v *= cloud;
            break;
          case Sky::overcast:
            level = std::clamp(level + rng.uniform(-0.05, 0.05), 0.1, 0.5);
            v *= level;
            break;
        }
      }
      csv.row(start + (static_cast<Timestamp>(day) * kStepsPerDay + k) * 900, v * kRatedWatts);
    }
  }
}

void constant(const fs::path& dir) {
  CsvWriter csv(dir / "constant.csv");
  const Timestamp t0 = *parse_timestamp("2025-03-01T08:00:00");
  for (int k = 0; k < 48; ++k) csv.row(t0 + k * 900, 50000.0);
}

void three_point(const fs::path& dir) {
  CsvWriter csv(dir / "three_point.csv");
  const Timestamp t0 = *parse_timestamp("2025-03-01T11:00:00");
  const double s[] = {0.3, 0.6, 0.9};
  for (int k = 0; k < 3; ++k) csv.row(t0 + k * 900, s[k]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled synthetic power series", "make_fixtures"};
  std::string out = "data";
  std::uint64_t seed = 2025;
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for the year fixture");
  CLI11_PARSE(app, argc, argv);
  try {
    fs::create_directories(out);
    clear_day(out);
    year(out, seed);
    constant(out);
    three_point(out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
