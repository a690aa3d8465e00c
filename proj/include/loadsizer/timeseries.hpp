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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loadsizer::timeseries {

// Seconds since 1970-01-01T00:00:00 of a calendar datetime. No time zone is
// applied: timestamps are taken as written in the file.
using Timestamp = std::int64_t;

// Parses "YYYY-MM-DDTHH:MM[:SS]" (a space may replace 'T', a trailing 'Z' is
// accepted). Returns nullopt on malformed text.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct PowerSample {
  Timestamp timestamp = 0;
  double power = 0.0;
};

// Gap-free, equispaced power samples.
//
// When `normalized` is set every value lies in [0, 1] and `s_max` is the
// divisor that was applied; with the default peak normalization the maximum
// is exactly 1.
struct PowerSeries {
  Timestamp start = 0;
  std::int64_t interval_seconds = 1;
  std::vector<double> power;
  double s_max = 0.0;
  bool normalized = false;

  std::size_t size() const noexcept { return power.size(); }
  Timestamp timestamp(std::size_t k) const noexcept {
    return start + static_cast<Timestamp>(k) * interval_seconds;
  }
};

struct SortedSeries {
  std::vector<double> values;  // non-decreasing
  std::size_t source_length = 0;
  bool zeros_removed = false;

  std::size_t size() const noexcept { return values.size(); }
};

struct LoadStats {
  std::size_t rows = 0;
  std::size_t source_interval_seconds = 0;
  std::size_t missing_windows = 0;  // zero-filled after resampling
};

// Reads a `timestamp,power_w` CSV (one header row, ISO-8601 timestamps) and
// resamples it onto a `resample_seconds` grid by arithmetic mean. Windows
// without any source sample are zero-filled and counted in `stats`.
// resample_seconds = 0 keeps the source interval.
PowerSeries load_series(const std::string& path, std::int64_t resample_seconds,
                        LoadStats* stats = nullptr);
PowerSeries parse_series(std::istream& in, std::int64_t resample_seconds,
                         LoadStats* stats = nullptr);

// Writes the series back out in the same two-column format.
void write_series(std::ostream& out, const PowerSeries& series);

// Divides by the series peak, or by `rating` (e.g. the AC nameplate) when
// given. Idempotent on an already normalized series.
PowerSeries normalize(const PowerSeries& series, std::optional<double> rating = std::nullopt);

SortedSeries sort_ascending(const PowerSeries& series, bool remove_zeros);
SortedSeries sort_ascending(const std::vector<double>& values, bool remove_zeros);

// Every ratio-th element starting at index ratio-1.
SortedSeries downsample_uniform(const SortedSeries& sorted, std::size_t ratio);

}  // namespace loadsizer::timeseries
