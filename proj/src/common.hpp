// Copyright 2026 The Airlock Authors
//
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

#ifndef AIRLOCK_COMMON_HPP_
#define AIRLOCK_COMMON_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airlock {

using Bytes = std::vector<uint8_t>;
using Key32 = std::array<uint8_t, 32>;

std::string to_hex(std::span<const uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline Key32 xor_keys(const Key32& a, const Key32& b) {
  Key32 out{};
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

}  // namespace airlock

#endif  // AIRLOCK_COMMON_HPP_
