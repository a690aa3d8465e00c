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

#include <unistd.h>

#include <filesystem>
#include <iostream>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "loadsizer/cli.hpp"
#include "loadsizer/error.hpp"

using namespace loadsizer;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("loadsizer_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

int run(std::vector<std::string> args) {
  std::vector<const char*> argv{"loadsizer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  // Keep test logs quiet: the CLI prints summaries to stdout.
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  auto* old_err = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  std::cerr.rdbuf(old_err);
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

const std::string kClear = LOADSIZER_DATA_DIR "/clear_day.csv";
const std::string kConstant = LOADSIZER_DATA_DIR "/constant.csv";
const std::string kThree = LOADSIZER_DATA_DIR "/three_point.csv";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "method = icls   # trailing\n"
      "\n"
      "out = \"a # b\"\n"
      "n=3\n");
  const auto e = cli::parse_config(in);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == std::pair<std::string, std::string>{"method", "icls"});
  CHECK(e[1].second == "a # b");
  CHECK(e[2] == std::pair<std::string, std::string>{"n", "3"});
  std::istringstream bad("method icls\n");
  CHECK_THROWS_AS(cli::parse_config(bad), ParseError);
  std::istringstream empty_key(" = 3\n");
  CHECK_THROWS_AS(cli::parse_config(empty_key), ParseError);
  CHECK_THROWS_AS(cli::load_config("/nonexistent/loadsizer.cfg"), DataError);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  CHECK(run({"--help"}) == cli::exit_code::ok);
  CHECK(run({}) == cli::exit_code::usage);
  CHECK(run({"size"}) == cli::exit_code::usage);
  CHECK(run({"size", "--input", kClear, "--bogus"}) == cli::exit_code::usage);
  CHECK(run({"size", "--input", kClear, "--method", "simulated"}) == cli::exit_code::usage);
  CHECK(run({"size", "--input", kClear, "--method", "ecls", "--gap", "0.1", "--out", dir.str()}) ==
        cli::exit_code::usage);
  CHECK(run({"size", "--input", "/nonexistent.csv", "--out", dir.str()}) == cli::exit_code::data);
  CHECK(run({"size", "--input", kClear, "--s-max", "10", "--out", dir.str()}) == cli::exit_code::data);
  CHECK(run({"compare", "--input", kClear, "--n", "7", "--out", dir.str()}) == cli::exit_code::usage);
  CHECK(run({"schedule", "--input", kClear, "--x", "0.5,abc", "--out", dir.str()}) == cli::exit_code::usage);
}

TEST_CASE("size writes result and schedule") {
  TempDir dir("size");
  REQUIRE(run({"size", "--input", kClear, "--s-max", "100000", "--method", "analytic", "--n", "1", "--out",
               dir.str()}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "analytic_n1.json"));
  CHECK(j["method"] == "analytic");
  CHECK(j["solar_utilization"].get<double>() == doctest::Approx(0.56).epsilon(0.01));
  const auto sched = lines(dir.path() / "analytic_n1_schedule.csv");
  CHECK(sched.front() == "timestamp,S,u_1,captured,mismatch");
  CHECK(sched.size() == 454);

  REQUIRE(run({"size", "--input", kConstant, "--method", "ecls", "--n", "2", "--out", dir.str()}) == 0);
  const auto e = nlohmann::json::parse(slurp(dir.path() / "ecls_n2.json"));
  CHECK(e["solar_utilization"].get<double>() == doctest::Approx(1.0));

  REQUIRE(run({"size", "--input", kThree, "--s-max", "1", "--method", "milp", "--n", "2", "--ratio", "1", "--out",
               dir.str()}) == 0);
  const auto m = nlohmann::json::parse(slurp(dir.path() / "milp_n2.json"));
  CHECK(m["objective"].get<double>() == doctest::Approx(0.0).scale(1.0));

  // Denormalized output reports watts.
  REQUIRE(run({"size", "--input", kConstant, "--method", "ecls", "--n", "1", "--denormalize", "--out", dir.str()}) ==
          0);
  const auto w = nlohmann::json::parse(slurp(dir.path() / "ecls_n1.json"));
  CHECK(w["x"][0].get<double>() == doctest::Approx(50000.0));
}

TEST_CASE("config file supplies defaults, flags win") {
  TempDir dir("config");
  const auto cfg = dir.path() / "run.cfg";
  std::ofstream(cfg) << "method = icls\nn = 3\nrestarts = 2\nout = \"" << dir.str() << "\"\n";
  REQUIRE(run({"size", "--input", kClear, "--config", cfg.string()}) == 0);
  CHECK(fs::exists(dir.path() / "icls_n3.json"));
  REQUIRE(run({"size", "--input", kClear, "--config", cfg.string(), "--n", "1"}) == 0);
  CHECK(fs::exists(dir.path() / "icls_n1.json"));
  std::ofstream(cfg) << "colour = blue\n";
  CHECK(run({"size", "--input", kClear, "--config", cfg.string()}) == cli::exit_code::usage);
  std::ofstream(cfg) << "denormalize = maybe\n";
  CHECK(run({"size", "--input", kClear, "--config", cfg.string()}) == cli::exit_code::usage);
  CHECK(run({"size", "--input", kClear, "--config", (dir.path() / "missing.cfg").string()}) == cli::exit_code::data);
}

TEST_CASE("fit, histogram, sensitivity, schedule") {
  TempDir dir("misc");
  REQUIRE(run({"fit", "--input", kClear, "--s-max", "100000", "--out", dir.str()}) == 0);
  const auto model = nlohmann::json::parse(slurp(dir.path() / "clear_sky.json"));
  CHECK(model["a"].get<double>() == doctest::Approx(0.9903).epsilon(0.02));
  CHECK(model["b"].get<double>() == doctest::Approx(0.006952).epsilon(0.02));
  CHECK(model["c"].get<double>() == doctest::Approx(1.572).epsilon(0.02));
  CHECK(lines(dir.path() / "fit.csv").size() == 454);

  REQUIRE(run({"size", "--input", kClear, "--method", "analytic", "--n", "2", "--model",
               (dir.path() / "clear_sky.json").string(), "--s-max", "100000", "--out", dir.str()}) == 0);

  REQUIRE(run({"histogram", "--input", kClear, "--n", "2", "--out", dir.str()}) == 0);
  const auto wide = lines(dir.path() / "histogram_wide.csv");
  CHECK(wide.front() == "bin,bin_start,combo_1,combo_2,combo_3");
  CHECK(wide.size() == 25);
  const auto longform = lines(dir.path() / "histogram.csv");
  CHECK(longform.front() == "bin,combo_index,count");
  CHECK(longform.size() == 1 + 24 * 3);

  REQUIRE(run({"sensitivity", "--input", kClear, "--n", "3", "--steps", "42", "--out", dir.str()}) == 0);
  const auto sens = lines(dir.path() / "sensitivity.csv");
  CHECK(sens.front() == "C,x1,x2,x3,SU");
  CHECK(sens.size() == 43);

  REQUIRE(run({"schedule", "--input", kThree, "--s-max", "1", "--x", "0.3,0.6", "--out", dir.str()}) == 0);
  const auto util = nlohmann::json::parse(slurp(dir.path() / "utilization.json"));
  CHECK(util["solar_utilization"].get<double>() == doctest::Approx(1.0));
  const auto rows = lines(dir.path() / "schedule.csv");
  REQUIRE(rows.size() == 4);
  // Sizes are reported largest first.
  CHECK(rows[1] == "2025-03-01T11:00:00,0.3,0,1,0.3,0");
}

TEST_CASE("compare is reproducible") {
  TempDir a("cmp_a"), b("cmp_b");
  const std::vector<std::string> common{"--input", kClear, "--s-max", "100000", "--n", "2", "3", "--ratio", "10",
                                        "--seed", "42"};
  auto with_out = [&](const TempDir& d) {
    auto args = common;
    args.insert(args.begin(), "compare");
    args.push_back("--out");
    args.push_back(d.str());
    return args;
  };
  REQUIRE(run(with_out(a)) == 0);
  REQUIRE(run(with_out(b)) == 0);
  CHECK(slurp(a.path() / "compare.csv") == slurp(b.path() / "compare.csv"));
  CHECK(slurp(a.path() / "normalized_su.csv") == slurp(b.path() / "normalized_su.csv"));
  const auto norm = lines(a.path() / "normalized_su.csv");
  for (const auto& line : norm)
    if (line.find(",ecls,") != std::string::npos) CHECK(line.substr(line.rfind(',') + 1) == "1");
}

}
