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

#include "loadsizer/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "loadsizer/error.hpp"

namespace loadsizer::timeseries {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  // YYYY-MM-DD[T ]HH:MM[:SS]
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') || text[13] != ':')
    return std::nullopt;
  if (text.size() == 19 && text[16] != ':') return std::nullopt;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi))
    return std::nullopt;
  if (text.size() == 19 && !parse_int(text.substr(17, 2), sec)) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_timestamp(Timestamp t) {
  Timestamp days = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  Timestamp rem = t - days * 86400;
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{static_cast<int>(days)}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

PowerSeries parse_series(std::istream& in, std::int64_t resample_seconds, LoadStats* stats) {
  if (resample_seconds < 0) throw DomainError("resample interval must be positive");

  std::vector<PowerSample> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (!have_header) {
      // The header is mandatory and must not itself look like data.
      if (comma == std::string_view::npos || parse_timestamp(view.substr(0, comma)))
        throw ParseError("missing header row 'timestamp,power_w'", line_no);
      have_header = true;
      continue;
    }
    if (comma == std::string_view::npos) throw ParseError("expected two columns", line_no);
    const auto ts = parse_timestamp(view.substr(0, comma));
    if (!ts) throw ParseError("unparsable timestamp", line_no);
    std::string_view rest = trim(view.substr(comma + 1));
    if (const auto extra = rest.find(','); extra != std::string_view::npos)
      rest = trim(rest.substr(0, extra));
    double p = 0.0;
    if (!parse_double(rest, p)) throw ParseError("unparsable power value", line_no);
    if (!std::isfinite(p) || p < 0.0)
      throw ParseError("power must be finite and non-negative", line_no);
    if (!rows.empty() && *ts <= rows.back().timestamp)
      throw DataError("timestamps not strictly increasing at line " + std::to_string(line_no));
    rows.push_back({*ts, p});
  }
  if (rows.empty()) throw ParseError("no data rows", 0);

  std::int64_t source = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const std::int64_t d = rows[k].timestamp - rows[k - 1].timestamp;
    source = source == 0 ? d : std::min(source, d);
  }
  if (source == 0) source = resample_seconds > 0 ? resample_seconds : 1;
  if (resample_seconds == 0) resample_seconds = source;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if ((rows[k].timestamp - rows[0].timestamp) % source != 0)
      throw DataError("timestamps are not on a regular grid (line " + std::to_string(k + 2) + ")");
  }
  if (resample_seconds % source != 0)
    throw DomainError("resample interval " + std::to_string(resample_seconds) +
                      " s is not a multiple of the source interval " + std::to_string(source) +
                      " s");

  const Timestamp first = rows.front().timestamp;
  const auto windows =
      static_cast<std::size_t>((rows.back().timestamp - first) / resample_seconds) + 1;
  std::vector<double> total(windows, 0.0);
  std::vector<std::size_t> count(windows, 0);
  for (const auto& r : rows) {
    const auto w = static_cast<std::size_t>((r.timestamp - first) / resample_seconds);
    total[w] += r.power;
    ++count[w];
  }
  PowerSeries out;
  out.start = first;
  out.interval_seconds = resample_seconds;
  out.power.resize(windows);
  std::size_t missing = 0;
  for (std::size_t w = 0; w < windows; ++w) {
    if (count[w] == 0) {
      ++missing;
      out.power[w] = 0.0;
    } else {
      out.power[w] = total[w] / static_cast<double>(count[w]);
    }
  }
  out.s_max = *std::max_element(out.power.begin(), out.power.end());
  if (stats) {
    stats->rows = rows.size();
    stats->source_interval_seconds = static_cast<std::size_t>(source);
    stats->missing_windows = missing;
  }
  return out;
}

PowerSeries load_series(const std::string& path, std::int64_t resample_seconds, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return parse_series(in, resample_seconds, stats);
}

void write_series(std::ostream& out, const PowerSeries& series) {
  out << "timestamp,power_w\n";
  char buf[64];
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f", series.power[k]);
    out << format_timestamp(series.timestamp(k)) << ',' << buf << '\n';
  }
}

PowerSeries normalize(const PowerSeries& series, std::optional<double> rating) {
  if (series.normalized) return series;
  if (series.power.empty()) throw DomainError("cannot normalize an empty series");
  const double peak = *std::max_element(series.power.begin(), series.power.end());
  if (!(peak > 0.0)) throw DomainError("cannot normalize an all-zero series");
  double divisor = peak;
  if (rating) {
    if (!(*rating >= peak))
      throw DomainError("normalization rating " + std::to_string(*rating) +
                        " is below the series peak " + std::to_string(peak));
    divisor = *rating;
  }
  PowerSeries out = series;
  for (double& v : out.power) v /= divisor;
  out.s_max = divisor;
  out.normalized = true;
  return out;
}

SortedSeries sort_ascending(const std::vector<double>& values, bool remove_zeros) {
  SortedSeries out;
  out.source_length = values.size();
  out.zeros_removed = remove_zeros;
  out.values.reserve(values.size());
  for (double v : values) {
    if (remove_zeros && v <= 0.0) continue;
    out.values.push_back(v);
  }
  std::sort(out.values.begin(), out.values.end());
  if (remove_zeros && out.values.empty())
    throw DomainError("series has no non-zero samples left after removing zeros");
  return out;
}

SortedSeries sort_ascending(const PowerSeries& series, bool remove_zeros) {
  if (!series.normalized) throw DomainError("sort_ascending expects a normalized series");
  return sort_ascending(series.power, remove_zeros);
}

SortedSeries downsample_uniform(const SortedSeries& sorted, std::size_t ratio) {
  if (ratio == 0) throw DomainError("downsampling ratio must be at least 1");
  if (ratio > sorted.size())
    throw DomainError("downsampling ratio " + std::to_string(ratio) + " exceeds series length " +
                      std::to_string(sorted.size()));
  SortedSeries out;
  out.source_length = sorted.source_length;
  out.zeros_removed = sorted.zeros_removed;
  out.values.reserve(sorted.size() / ratio);
  for (std::size_t i = ratio - 1; i < sorted.size(); i += ratio) out.values.push_back(sorted.values[i]);
  return out;
}

}  // namespace loadsizer::timeseries
