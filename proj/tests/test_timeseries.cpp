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

#include <doctest.h>

#include <array>

#include <cmath>
#include <sstream>

#include "loadsizer/clear_sky.hpp"
#include "loadsizer/error.hpp"
#include "loadsizer/timeseries.hpp"

using namespace loadsizer;
using namespace loadsizer::timeseries;

namespace {

PowerSeries parse(const std::string& text, std::int64_t resample = 0, LoadStats* stats = nullptr) {
  std::istringstream in(text);
  return parse_series(in, resample, stats);
}

// Samples a*sin(b t + c) at integer t in [-half, half], clamped at zero.
PowerSeries sampled_model(double a, double b, double c, long half) {
  PowerSeries s;
  s.interval_seconds = 120;
  for (long t = -half; t <= half; ++t) s.power.push_back(std::max(0.0, a * std::sin(b * t + c)));
  s.s_max = 1.0;
  s.normalized = true;
  return s;
}

}  // namespace

TEST_SUITE("timeseries") {

TEST_CASE("timestamps round-trip") {
  const auto t = parse_timestamp("2025-06-21T12:34:56");
  REQUIRE(t);
  CHECK(format_timestamp(*t) == "2025-06-21T12:34:56");
  CHECK(parse_timestamp("2025-06-21 12:34") == *parse_timestamp("2025-06-21T12:34:00"));
  CHECK(parse_timestamp("2025-06-21T12:34:56Z") == t);
  CHECK_FALSE(parse_timestamp("2025-02-30T00:00:00"));
  CHECK_FALSE(parse_timestamp("2025-06-21T24:00:00"));
  CHECK_FALSE(parse_timestamp("21/06/2025 12:00"));
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00");
  CHECK(format_timestamp(-1) == "1969-12-31T23:59:59");
}

TEST_CASE("parse keeps the source interval by default") {
  LoadStats stats;
  const auto s = parse(
      "timestamp,power_w\n"
      "2025-01-01T10:00:00,10\n"
      "2025-01-01T10:15:00,20\n"
      "2025-01-01T10:30:00,40\n",
      0, &stats);
  CHECK(s.size() == 3);
  CHECK(s.interval_seconds == 900);
  CHECK(s.s_max == 40.0);
  CHECK_FALSE(s.normalized);
  CHECK(stats.rows == 3);
  CHECK(stats.missing_windows == 0);
}

TEST_CASE("resampling averages windows and zero-fills gaps") {
  LoadStats stats;
  const auto s = parse(
      "timestamp,power_w\n"
      "2025-01-01T10:00:00,10\n"
      "2025-01-01T10:15:00,30\n"
      "2025-01-01T11:15:00,50\n",
      1800, &stats);
  REQUIRE(s.size() == 3);
  CHECK(s.power[0] == 20.0);
  CHECK(s.power[1] == 0.0);
  CHECK(s.power[2] == 50.0);
  CHECK(stats.missing_windows == 1);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(parse("2025-01-01T10:00:00,1\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00,abc\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00,-1\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:15:00,1\n2025-01-01T10:00:00,1\n"), DataError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00,1\n2025-01-01T10:15:00,1\n2025-01-01T10:40:00,1\n"),
                  DataError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00,1\n2025-01-01T10:15:00,1\n", 1000), DomainError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2025-01-01T10:00:00,1\n", -5), DomainError);
  CHECK_THROWS_AS(load_series("/nonexistent/series.csv", 0), ParseError);
}

TEST_CASE("normalize divides by the peak or a rating") {
  const auto raw = parse("timestamp,power_w\n2025-01-01T10:00:00,20\n2025-01-01T10:15:00,80\n");
  const auto by_peak = normalize(raw);
  CHECK(by_peak.power == std::vector<double>{0.25, 1.0});
  CHECK(by_peak.s_max == 80.0);
  CHECK(normalize(by_peak).power == by_peak.power);
  const auto rated = normalize(raw, 100.0);
  CHECK(rated.power == std::vector<double>{0.2, 0.8});
  CHECK(rated.s_max == 100.0);
  CHECK_THROWS_AS(normalize(raw, 50.0), DomainError);
  const auto zeros = parse("timestamp,power_w\n2025-01-01T10:00:00,0\n");
  CHECK_THROWS_AS(normalize(zeros), DomainError);
}

TEST_CASE("sorting and uniform downsampling") {
  const std::vector<double> v{0.5, 0.0, 0.9, 0.1, 0.0, 0.7};
  const auto full = sort_ascending(v, false);
  CHECK(full.values == std::vector<double>{0.0, 0.0, 0.1, 0.5, 0.7, 0.9});
  const auto nz = sort_ascending(v, true);
  CHECK(nz.values == std::vector<double>{0.1, 0.5, 0.7, 0.9});
  CHECK(nz.source_length == 6);
  CHECK(nz.zeros_removed);
  CHECK_THROWS_AS(sort_ascending(std::vector<double>{0.0, 0.0}, true), DomainError);

  const auto d2 = downsample_uniform(full, 2);
  CHECK(d2.values == std::vector<double>{0.0, 0.5, 0.9});
  CHECK(downsample_uniform(full, 1).values == full.values);
  // The last sample kept is the series maximum whenever the ratio divides T.
  CHECK(downsample_uniform(full, 3).values == std::vector<double>{0.1, 0.9});
  CHECK_THROWS_AS(downsample_uniform(full, 0), DomainError);
  CHECK_THROWS_AS(downsample_uniform(full, 7), DomainError);

  PowerSeries raw;
  raw.power = v;
  CHECK_THROWS_AS(sort_ascending(raw, true), DomainError);
}

TEST_CASE("year fixture shape") {
  const auto s = normalize(load_series(LOADSIZER_DATA_DIR "/year_15min.csv", 0));
  CHECK(s.size() == 35040);
  CHECK(s.interval_seconds == 900);
  const auto sorted = sort_ascending(s, false);
  CHECK(sorted.size() == 35040);
  CHECK(std::is_sorted(sorted.values.begin(), sorted.values.end()));
  CHECK(sorted.values.back() == 1.0);
  CHECK(sorted.values.front() == 0.0);
  const auto d = downsample_uniform(sorted, 140);
  CHECK(d.size() == 250);
  CHECK(d.values.front() == 0.0);
}

TEST_CASE("clear-sky model from trig parameters") {
  const auto m = ClearSkyModel::from_trig(0.9903, 0.006952, 1.572);
  CHECK(m.inverse.alpha == doctest::Approx(143.84).epsilon(1e-4));
  CHECK(m.inverse.beta == doctest::Approx(1.0098).epsilon(1e-4));
  CHECK(m.inverse.gamma == doctest::Approx(-226.12).epsilon(1e-4));
  CHECK(m.t_max == doctest::Approx(225.78).epsilon(1e-4));
  CHECK(m.y_max == 0.9903);
  // The inverse branch reproduces the rising half of the curve.
  for (double y : {0.1, 0.4, 0.8, 0.98}) {
    const double t = model_inverse(m, y);
    CHECK(m.evaluate(t) == doctest::Approx(y).epsilon(1e-12));
    const double h = 1e-6;
    const double fd = (model_inverse(m, y + h) - model_inverse(m, y - h)) / (2 * h);
    CHECK(model_inverse_derivative(m, y) == doctest::Approx(fd).epsilon(1e-5));
  }
  CHECK_THROWS_AS(model_inverse(m, 0.0), DomainError);
  CHECK_THROWS_AS(model_inverse(m, 1.2), DomainError);
  CHECK_THROWS_AS(ClearSkyModel::from_trig(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("noise-free fit recovers the generating parameters") {
  const std::vector<std::array<double, 3>> cases{{0.9903, 0.006952, 1.572}, {0.8, 0.01, 1.5688}, {1.0, 0.02, 1.5758}};
  for (const auto& [a, b, c] : cases) {
    const auto half = static_cast<long>(std::ceil((std::numbers::pi - c) / b)) + 3;
    const auto m = fit_clear_day(sampled_model(a, b, c, half));
    CHECK(m.trig.a == doctest::Approx(a).epsilon(1e-6));
    CHECK(m.trig.b == doctest::Approx(b).epsilon(1e-6));
    CHECK(m.trig.c == doctest::Approx(c).epsilon(1e-6));
    CHECK(m.residual_rms < 1e-9);
    REQUIRE(m.quadratic);
    CHECK(m.quadratic->p1 < 0.0);
  }
}

TEST_CASE("clear-day fixture fit matches the reference parameters") {
  const auto s = normalize(load_series(LOADSIZER_DATA_DIR "/clear_day.csv", 0), 100000.0);
  CHECK(s.size() == 453);
  const auto m = fit_clear_day(s);
  CHECK(m.trig.a == doctest::Approx(0.9903).epsilon(0.02));
  CHECK(m.trig.b == doctest::Approx(0.006952).epsilon(0.02));
  CHECK(m.trig.c == doctest::Approx(1.572).epsilon(0.02));
  CHECK(m.inverse.alpha == doctest::Approx(143.8).epsilon(0.02));
  CHECK(m.inverse.beta == doctest::Approx(1.01).epsilon(0.02));
  CHECK(m.inverse.gamma == doctest::Approx(-226.1).epsilon(0.02));
}

TEST_CASE("model JSON round-trip") {
  auto m = ClearSkyModel::from_trig(0.9, 0.007, 1.57);
  m.quadratic = ClearSkyModel::Quadratic{-1e-5, 0.0, 0.88};
  const auto back = clear_sky_from_json(to_json(m));
  CHECK(back.trig.a == m.trig.a);
  CHECK(back.trig.b == m.trig.b);
  CHECK(back.trig.c == m.trig.c);
  REQUIRE(back.quadratic);
  CHECK(back.quadratic->p3 == 0.88);
  CHECK_THROWS_AS(clear_sky_from_json("{\"a\": 1}"), ParseError);
  CHECK_THROWS_AS(clear_sky_from_json("not json"), ParseError);
}

TEST_CASE("fit rejects degenerate input") {
  PowerSeries s;
  s.power = {0.0, 0.5, 0.0};
  s.normalized = true;
  CHECK_THROWS_AS(fit_clear_day(s), DomainError);
  s.power.clear();
  CHECK_THROWS_AS(fit_clear_day(s), DomainError);
}

}
