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

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loadsizer/analytic.hpp"
#include "loadsizer/cli.hpp"
#include "loadsizer/clear_sky.hpp"
#include "loadsizer/dispatch.hpp"
#include "loadsizer/ecls.hpp"
#include "loadsizer/error.hpp"
#include "loadsizer/icls.hpp"
#include "loadsizer/milp.hpp"
#include "loadsizer/result.hpp"
#include "loadsizer/timeseries.hpp"

namespace loadsizer::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string input;
  std::int64_t resample = 0;
  double s_max = 0.0;  // 0: normalize by the series peak
  std::string out = ".";
  bool denormalize = false;
  std::uint64_t seed = 42;
  std::string config;

  std::string method = "ecls";
  std::size_t n = 2;
  std::vector<std::size_t> ns{2, 3, 4, 5, 6};
  std::size_t c_steps = 100;
  std::size_t block_length = 20;
  int restarts = 4;
  std::size_t ratio = 50;
  double gap = 0.0;
  std::size_t node_limit = 2000;
  double big_m = milp::kDefaultBigM;
  bool no_tighten = false;
  int multistarts = 16;
  std::string model;
  std::size_t bins = 24;
  std::size_t steps = 100;
  std::string x;
};

struct Prepared {
  timeseries::PowerSeries series;  // normalized, time order
  timeseries::SortedSeries nonzero;
  timeseries::SortedSeries full;
};

Prepared prepare(const Options& o) {
  timeseries::LoadStats stats;
  const auto raw = timeseries::load_series(o.input, o.resample, &stats);
  if (stats.missing_windows > 0)
    std::cerr << "warning: " << stats.missing_windows << " empty resampling windows zero-filled\n";
  Prepared p;
  p.series = timeseries::normalize(raw, o.s_max > 0.0 ? std::optional<double>(o.s_max) : std::nullopt);
  p.nonzero = timeseries::sort_ascending(p.series, true);
  p.full = timeseries::sort_ascending(p.series, false);
  return p;
}

double output_scale(const Options& o, const Prepared& p) { return o.denormalize ? p.series.s_max : 1.0; }

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + tmp.string());
    f << content;
    if (!f) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<double> parse_sizes(const std::string& text) {
  std::vector<double> x;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      x.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("--x expects comma-separated numbers, got '" + text + "'");
    }
  }
  if (x.empty()) throw UsageError("--x needs at least one size");
  for (double v : x)
    if (!(v > 0.0)) throw UsageError("--x sizes must be positive");
  std::sort(x.begin(), x.end(), std::greater<>());
  return x;
}

timeseries::ClearSkyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return timeseries::clear_sky_from_json(ss.str());
}

SizingResult run_method(const std::string& method, std::size_t n, const Prepared& data, const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  SizingResult r;
  if (method == "analytic") {
    const auto model = o.model.empty() ? timeseries::fit_clear_day(data.series) : load_model(o.model);
    const auto profile = analytic::SymmetricProfile::from_model(model);
    analytic::AnalyticSolution s;
    if (n == 1) {
      s = analytic::solve_single_load(profile);
    } else if (n == 2) {
      s = analytic::solve_two_load(profile, {0.25 * profile.y_max(), 0.5 * profile.y_max()});
    } else {
      analytic::MultiLoadOptions mo;
      mo.multistarts = o.multistarts;
      mo.seed = o.seed;
      s = analytic::solve_n_load(profile, static_cast<int>(n), mo);
    }
    r = from_analytic(s);
  } else if (method == "ecls") {
    ecls::EclsOptions eo;
    eo.c_steps = o.c_steps;
    eo.block_length = o.block_length;
    r = from_ecls(ecls::line_search_C(data.nonzero, n, eo));
  } else if (method == "icls") {
    icls::IclsOptions io;
    io.restarts = o.restarts;
    io.seed = o.seed;
    r = from_icls(icls::optimize_m(data.nonzero, n, io));
  } else if (method == "milp") {
    const auto reduced = timeseries::downsample_uniform(data.full, o.ratio);
    const auto inst = milp::build_instance(reduced.values, n, o.big_m, !o.no_tighten);
    milp::Options mo;
    mo.gap_tol = o.gap;
    mo.node_limit = o.node_limit;
    r = from_milp(milp::branch_and_bound(inst, mo), inst);
    r.diagnostics["ratio"] = o.ratio;
  } else {
    throw UsageError("unknown method '" + method + "'");
  }
  // Every method is scored by the same full-series dispatch.
  r.solar_utilization = dispatch::solar_utilization(data.series.power, r.x);
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) line += ',';
    line += cells[k];
  }
  return line + '\n';
}

std::string schedule_csv(const Prepared& data, std::span<const double> x, double scale) {
  const auto sched = dispatch::dispatch_greedy(data.series, x);
  const auto report = dispatch::utilization(data.series.power, sched, x);
  std::string out = "timestamp,S";
  for (std::size_t i = 0; i < x.size(); ++i) out += ",u_" + std::to_string(i + 1);
  out += ",captured,mismatch\n";
  for (std::size_t t = 0; t < sched.steps(); ++t) {
    std::vector<std::string> cells{timeseries::format_timestamp(data.series.timestamp(t)),
                                   format_number(data.series.power[t] * scale)};
    for (std::size_t i = 0; i < x.size(); ++i) cells.push_back(sched.on(i, t) ? "1" : "0");
    const double served = data.series.power[t] - report.mismatch[t];
    cells.push_back(format_number(served * scale));
    cells.push_back(format_number(report.mismatch[t] * scale));
    out += csv_row(cells);
  }
  return out;
}

std::string describe(const SizingResult& r) {
  std::ostringstream s;
  s << r.method << " n=" << r.n << " x=[";
  for (std::size_t i = 0; i < r.x.size(); ++i) s << (i ? ", " : "") << format_number(r.x[i]);
  s << "] SU=" << format_number(r.solar_utilization);
  if (!r.ok()) s << " FAILED: " << r.error;
  return s.str();
}

// --- subcommands -----------------------------------------------------------

const std::vector<std::string> kMethods{"analytic", "ecls", "icls", "milp"};

void check_knobs(CLI::App* sub, const std::string& method) {
  static const std::map<std::string, std::string> owner{
      {"--c-steps", "ecls"},   {"--block-length", "ecls"}, {"--restarts", "icls"},
      {"--ratio", "milp"},     {"--gap", "milp"},          {"--node-limit", "milp"},
      {"--big-m", "milp"},     {"--no-tighten", "milp"},   {"--model", "analytic"},
      {"--multistarts", "analytic"}};
  if (method == "all") return;
  for (const auto& [flag, m] : owner) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt != nullptr && opt->count() > 0 && m != method)
      throw UsageError(flag + " applies to --method " + m + ", not " + method);
  }
}

int cmd_fit(const Options& o) {
  const Prepared data = prepare(o);
  const auto model = timeseries::fit_clear_day(data.series);
  const std::string text = timeseries::to_json(model);
  write_atomic(fs::path(o.out) / "clear_sky.json", text + "\n");

  const auto& v = data.series.power;
  const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double scale = output_scale(o, data);
  std::string csv = "t,measured,trig,quadratic\n";
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double t = static_cast<double>(k) - static_cast<double>(peak);
    const double trig = std::max(0.0, model.evaluate(t));
    double quad = 0.0;
    if (model.quadratic) quad = std::max(0.0, (model.quadratic->p1 * t + model.quadratic->p2) * t + model.quadratic->p3);
    csv += csv_row({format_number(t), format_number(v[k] * scale), format_number(trig * scale),
                    format_number(quad * scale)});
  }
  write_atomic(fs::path(o.out) / "fit.csv", csv);
  std::cout << text << "\n";
  return exit_code::ok;
}

int cmd_size(CLI::App* sub, const Options& o) {
  check_knobs(sub, o.method);
  if (o.n < 1) throw UsageError("--n must be at least 1");
  const Prepared data = prepare(o);
  const double scale = output_scale(o, data);
  const std::vector<std::string> methods =
      o.method == "all" ? std::vector<std::string>{"ecls", "icls", "milp"} : std::vector<std::string>{o.method};
  for (const auto& m : methods) {
    const SizingResult r = run_method(m, o.n, data, o);
    const std::string stem = m + "_n" + std::to_string(o.n);
    write_atomic(fs::path(o.out) / (stem + ".json"), to_json(r, scale).dump(2) + "\n");
    write_atomic(fs::path(o.out) / (stem + "_schedule.csv"), schedule_csv(data, r.x, scale));
    std::cout << describe(r) << "\n";
  }
  return exit_code::ok;
}

int cmd_schedule(const Options& o) {
  if (o.x.empty()) throw UsageError("schedule needs --x");
  const Prepared data = prepare(o);
  std::vector<double> x = parse_sizes(o.x);
  if (o.denormalize)
    for (double& v : x) v /= data.series.s_max;
  const double scale = output_scale(o, data);
  write_atomic(fs::path(o.out) / "schedule.csv", schedule_csv(data, x, scale));
  const auto sched = dispatch::dispatch_greedy(data.series, x);
  const auto report = dispatch::utilization(data.series.power, sched, x);
  json j;
  j["captured_energy"] = report.captured_energy * scale;
  j["total_energy"] = report.total_energy * scale;
  j["solar_utilization"] = report.solar_utilization;
  write_atomic(fs::path(o.out) / "utilization.json", j.dump(2) + "\n");
  std::cout << "SU=" << format_number(report.solar_utilization) << "\n";
  return exit_code::ok;
}

int cmd_compare(const Options& o) {
  if (o.ns.empty()) throw UsageError("compare needs at least one --n");
  for (std::size_t n : o.ns)
    if (n < 2 || n > 6) throw UsageError("compare supports n in 2..6");
  const Prepared data = prepare(o);
  const double scale = output_scale(o, data);
  std::vector<std::string> methods{"ecls", "icls", "milp"};
  if (!o.model.empty()) methods.insert(methods.begin(), "analytic");

  const std::size_t width = *std::max_element(o.ns.begin(), o.ns.end());
  std::string table = "method,n";
  for (std::size_t i = 1; i <= width; ++i) table += ",x" + std::to_string(i);
  table += ",objective,solar_utilization,status\n";
  std::string normalized = "n,method,solar_utilization,normalized_su\n";
  json all = json::array();
  bool failed = false;

  for (std::size_t n : o.ns) {
    std::vector<SizingResult> rows;
    for (const auto& m : methods) {
      SizingResult r;
      try {
        r = run_method(m, n, data, o);
      } catch (const Error& e) {
        r = SizingResult{};
        r.method = m;
        r.n = n;
        r.error = e.what();
        failed = true;
      }
      std::cout << describe(r) << "\n";
      rows.push_back(std::move(r));
    }
    const SizingResult* base = nullptr;
    for (const auto& r : rows)
      if (r.method == "ecls" && r.ok()) base = &r;
    for (const auto& r : rows) {
      std::vector<std::string> cells{r.method, std::to_string(n)};
      for (std::size_t i = 0; i < width; ++i)
        cells.push_back(r.ok() && i < r.x.size() ? format_number(r.x[i] * scale) : "");
      cells.push_back(r.ok() ? format_number(r.objective) : "");
      cells.push_back(r.ok() ? format_number(r.solar_utilization) : "");
      std::string status = r.ok() ? "ok" : "failed: " + r.error;
      std::replace(status.begin(), status.end(), ',', ';');
      cells.push_back(status);
      table += csv_row(cells);

      std::string norm;
      if (r.ok() && base != nullptr)
        norm = &r == base ? "1" : format_number(r.solar_utilization / base->solar_utilization);
      normalized += csv_row({std::to_string(n), r.method, r.ok() ? format_number(r.solar_utilization) : "", norm});
      all.push_back(to_json(r, scale));
    }
  }
  write_atomic(fs::path(o.out) / "compare.csv", table);
  write_atomic(fs::path(o.out) / "normalized_su.csv", normalized);
  write_atomic(fs::path(o.out) / "compare.json", all.dump(2) + "\n");
  return failed ? exit_code::partial : exit_code::ok;
}

int cmd_histogram(CLI::App* sub, const Options& o) {
  const Prepared data = prepare(o);
  std::vector<double> x;
  if (!o.x.empty()) {
    x = parse_sizes(o.x);
    if (o.denormalize)
      for (double& v : x) v /= data.series.s_max;
  } else {
    check_knobs(sub, o.method);
    x = run_method(o.method, o.n, data, o).x;
  }
  const auto sched = dispatch::dispatch_greedy(data.series, x);
  const auto h = dispatch::combo_histogram(data.series, sched, o.bins);
  // Long form, then one row per time-of-day bin with a column per non-empty
  // switch state.
  std::string csv = "bin,combo_index,count\n";
  std::string wide = "bin,bin_start";
  for (Combo d = 1; d < h.combos; ++d) wide += ",combo_" + std::to_string(d);
  wide += '\n';
  for (std::size_t b = 0; b < h.bins_per_day; ++b) {
    const std::size_t sec = b * 86400 / h.bins_per_day;
    char start[32];
    std::snprintf(start, sizeof start, "%02zu:%02zu:%02zu", sec / 3600, sec / 60 % 60, sec % 60);
    std::vector<std::string> cells{std::to_string(b), start};
    for (Combo d = 1; d < h.combos; ++d) {
      csv += csv_row({std::to_string(b), std::to_string(d), std::to_string(h.at(b, d))});
      cells.push_back(std::to_string(h.at(b, d)));
    }
    wide += csv_row(cells);
  }
  write_atomic(fs::path(o.out) / "histogram_wide.csv", wide);
  write_atomic(fs::path(o.out) / "histogram.csv", csv);
  return exit_code::ok;
}

int cmd_sensitivity(const Options& o) {
  const Prepared data = prepare(o);
  ecls::EclsOptions eo;
  eo.c_steps = o.steps;
  eo.block_length = o.block_length;
  const auto table = ecls::sensitivity_table(data.nonzero, o.n, eo);
  const double scale = output_scale(o, data);
  std::string csv = "C";
  for (std::size_t i = 1; i <= o.n; ++i) csv += ",x" + std::to_string(i);
  csv += ",SU\n";
  for (const auto& row : table) {
    std::vector<std::string> cells{format_number(row.C)};
    for (double v : row.x) cells.push_back(format_number(v * scale));
    cells.push_back(format_number(row.solar_utilization));
    csv += csv_row(cells);
  }
  write_atomic(fs::path(o.out) / "sensitivity.csv", csv);
  const auto& best = table[ecls::best_row(table)];
  std::cout << "best C=" << format_number(best.C) << " SU=" << format_number(best.solar_utilization) << "\n";
  return exit_code::ok;
}

// --- parsing ----------------------------------------------------------------

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "timestamp,power_w CSV")->required();
  sub->add_option("--resample", o.resample, "resampling interval in seconds (0 keeps the source)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--s-max", o.s_max, "normalization rating in input units (default: series peak)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o.out, "output directory");
  sub->add_flag("--denormalize", o.denormalize, "report sizes and power in input units");
  sub->add_option("--seed", o.seed, "seed for every randomized step");
  sub->add_option("--config", o.config, "key = value file mirroring the flags; flags win");
}

void add_method_knobs(CLI::App* sub, Options& o) {
  sub->add_option("--c-steps", o.c_steps, "ECLS line-search steps over C")->check(CLI::Range(2, 100000));
  sub->add_option("--block-length", o.block_length, "ECLS rows per switch state")->check(CLI::PositiveNumber);
  sub->add_option("--restarts", o.restarts, "ICLS search starts")->check(CLI::Range(1, 1000000));
  sub->add_option("--ratio", o.ratio, "MILP downsampling ratio")->check(CLI::PositiveNumber);
  sub->add_option("--gap", o.gap, "MILP relative gap tolerance")->check(CLI::NonNegativeNumber);
  sub->add_option("--node-limit", o.node_limit, "MILP branch-and-bound node limit")->check(CLI::PositiveNumber);
  sub->add_option("--big-m", o.big_m, "MILP big-M constant")->check(CLI::PositiveNumber);
  sub->add_flag("--no-tighten", o.no_tighten, "keep big-M as given instead of max(s)");
  sub->add_option("--model", o.model, "clear-sky model JSON for the analytic method");
  sub->add_option("--multistarts", o.multistarts, "analytic starts for n > 2")->check(CLI::Range(1, 100000));
}

std::string arg_value(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == flag && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind(flag + "=", 0) == 0) return args[k].substr(flag.size() + 1);
  }
  return {};
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Config entries become flags ahead of the user's, skipping any the user set.
std::vector<std::string> merge_config(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const std::string path = arg_value(args, "--config");
  if (path.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return args;
  std::vector<std::string> merged{args.front()};
  for (const auto& [key, value] : load_config(path)) {
    const std::string flag = "--" + key;
    if (flag == "--config") throw UsageError("config files cannot include other config files");
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) throw UsageError("unknown config key '" + key + "' for " + args.front());
    if (has_flag(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") merged.push_back(flag);
      else if (value != "false" && value != "0" && value != "no")
        throw UsageError("config key '" + key + "' expects true or false");
      continue;
    }
    merged.push_back(flag);
    if (opt->get_items_expected_max() <= 1) {
      merged.push_back(value);
      continue;
    }
    std::string list = value;
    std::replace(list.begin(), list.end(), ',', ' ');
    std::stringstream parts(list);
    std::string part;
    while (parts >> part) merged.push_back(part);
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Static sizing and scheduling of binary loads on a solar power series", "loadsizer"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "fit the clear-sky model to one clear day");
  add_common(fit, o);

  auto* size = app.add_subcommand("size", "size n loads with one method, dispatch, report SU");
  add_common(size, o);
  size->add_option("--method", o.method)->check(CLI::IsMember({"analytic", "ecls", "icls", "milp", "all"}));
  size->add_option("--n", o.n, "number of loads")->check(CLI::Range(1, 12));
  add_method_knobs(size, o);

  auto* schedule = app.add_subcommand("schedule", "dispatch given sizes over the series");
  add_common(schedule, o);
  schedule->add_option("--x", o.x, "comma-separated unit sizes (normalized unless --denormalize)")->required();

  auto* compare = app.add_subcommand("compare", "run every method for each n and compare SU");
  add_common(compare, o);
  compare->add_option("--n", o.ns, "numbers of loads (2..6)")->expected(1, 5);
  add_method_knobs(compare, o);

  auto* histogram = app.add_subcommand("histogram", "time-of-day switch-state histogram");
  add_common(histogram, o);
  histogram->add_option("--method", o.method)->check(CLI::IsMember({"analytic", "ecls", "icls", "milp"}));
  histogram->add_option("--n", o.n, "number of loads")->check(CLI::Range(1, 12));
  histogram->add_option("--x", o.x, "use these sizes instead of running a method");
  histogram->add_option("--bins", o.bins, "time-of-day bins per day")->check(CLI::Range(1, 86400));
  add_method_knobs(histogram, o);

  auto* sensitivity = app.add_subcommand("sensitivity", "ECLS sweep over C");
  add_common(sensitivity, o);
  sensitivity->add_option("--n", o.n, "number of loads")->check(CLI::Range(1, 12));
  sensitivity->add_option("--steps", o.steps, "number of C values")->check(CLI::Range(2, 100000));
  sensitivity->add_option("--block-length", o.block_length)->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    args = merge_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (fit->parsed()) return cmd_fit(o);
    if (size->parsed()) return cmd_size(size, o);
    if (schedule->parsed()) return cmd_schedule(o);
    if (compare->parsed()) return cmd_compare(o);
    if (histogram->parsed()) return cmd_histogram(histogram, o);
    if (sensitivity->parsed()) return cmd_sensitivity(o);
    return exit_code::usage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::usage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::data;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::data;
  }
}

}  // namespace loadsizer::cli
