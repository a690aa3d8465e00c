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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace loadsizer::cli {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// key = value lines; '#' starts a comment; values may be double-quoted.
ConfigEntries parse_config(std::istream& in);
ConfigEntries load_config(const std::string& path);

// Runs the loadsizer command line. Returns the process exit code.
int run(int argc, const char* const* argv);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int data = 1;
inline constexpr int usage = 2;
inline constexpr int partial = 3;
}  // namespace exit_code

}  // namespace loadsizer::cli
