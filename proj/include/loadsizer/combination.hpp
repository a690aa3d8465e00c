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
#include <span>

namespace loadsizer {

// Switch-state code d = sum_i u_i 2^(n-1-i) over 0-based unit index i, so
// the first unit is the most significant bit.
using Combo = std::uint32_t;

inline constexpr std::size_t kMaxEnumeratedUnits = 20;

inline Combo combo_count(std::size_t n) { return Combo{1} << n; }

inline bool unit_on(Combo d, std::size_t n, std::size_t i) { return (d >> (n - 1 - i)) & 1U; }

inline Combo binary_order(std::span<const std::uint8_t> u) {
  Combo d = 0;
  for (std::uint8_t bit : u) d = (d << 1) | (bit != 0 ? 1U : 0U);
  return d;
}

inline double combo_level(Combo d, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (unit_on(d, x.size(), i)) sum += x[i];
  return sum;
}

}  // namespace loadsizer
