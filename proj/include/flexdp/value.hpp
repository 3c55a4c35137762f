//
// Copyright 2026 The FlexDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef FLEXDP_VALUE_HPP_
#define FLEXDP_VALUE_HPP_

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace flexdp {

// A cell value. Integers and strings only; mixed-type comparisons order every
// integer before every string (std::variant ordering).
using Value = std::variant<std::int64_t, std::string>;

inline std::string ToString(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

// Text that is entirely an optionally signed decimal integer becomes an
// integer; everything else stays a string.
inline Value ParseValue(std::string_view text) {
  std::int64_t parsed = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end) {
    auto [ptr, ec] = std::from_chars(begin, end, parsed);
    if (ec == std::errc() && ptr == end) return parsed;
  }
  return std::string(text);
}

}  // namespace flexdp

#endif  // FLEXDP_VALUE_HPP_
