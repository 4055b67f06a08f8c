/**
 * Copyright (c) 2026 The ginfer authors.
 *     All rights reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing,
 *  software distributed under the License is distributed on an "AS
 *  IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
 *  express or implied.  See the License for the specific language
 *  governing permissions and limitations under the License.
 */

#ifndef GINFER_IO_UTIL_HPP
#define GINFER_IO_UTIL_HPP

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ginfer/tensor.hpp"

namespace ginfer {

// Shortest round-trip decimal form; the same float always prints the same
// bytes, which the determinism contracts of the output tables rely on.
inline std::string format_float(float x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_float failed");
  return std::string(buf, ptr);
}

inline std::string format_float_list(const DenseVector& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_float(v[i]);
  }
  return out;
}

inline bool parse_float(std::string_view text, float& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Split on a separator; an empty input yields no fields.
inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool parse_float_list(std::string_view text, DenseVector& out) {
  out.clear();
  if (text.empty()) return true;
  for (std::string_view field : split_view(text, ',')) {
    float x = 0.0f;
    if (!parse_float(field, x)) return false;
    out.push_back(x);
  }
  return true;
}

}  // namespace ginfer

#endif  // GINFER_IO_UTIL_HPP
