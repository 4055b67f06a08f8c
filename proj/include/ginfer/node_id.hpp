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

#ifndef GINFER_NODE_ID_HPP
#define GINFER_NODE_ID_HPP

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ginfer/rng.hpp"

namespace ginfer {

// Node identifier. Physical nodes carry only `raw`; shadow mirrors of a
// node additionally carry the mirror group they were split into. Ordering
// is (raw, group) with "no group" sorting before group 0.
struct NodeId {
  std::uint64_t raw = 0;
  std::optional<std::uint32_t> mirror_group;

  bool is_mirror() const { return mirror_group.has_value(); }

  // Identity of the original node, with any mirror suffix stripped.
  NodeId physical() const { return NodeId{raw, std::nullopt}; }

  auto operator<=>(const NodeId&) const = default;
};

// Text form is "raw" for physical nodes and "raw#group" for mirrors.
inline std::string to_string(const NodeId& id) {
  std::string s = std::to_string(id.raw);
  if (id.mirror_group) {
    s += '#';
    s += std::to_string(*id.mirror_group);
  }
  return s;
}

inline std::optional<NodeId> parse_node_id(std::string_view text) {
  NodeId id;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, id.raw);
  if (ec != std::errc{} || ptr == first) return std::nullopt;
  if (ptr == last) return id;
  if (*ptr != '#') return std::nullopt;
  ++ptr;
  std::uint32_t group = 0;
  auto [ptr2, ec2] = std::from_chars(ptr, last, group);
  if (ec2 != std::errc{} || ptr2 != last || ptr2 == ptr) return std::nullopt;
  id.mirror_group = group;
  return id;
}

// Worker that owns a node. Physical nodes use plain modulo, following the
// usual id-based partitioning of vertex-centric systems. Mirrors are placed
// by a mixed hash of (raw, group) so the mirrors of one hub spread over
// several workers instead of stacking on raw % num_workers.
inline std::uint32_t partition_of(const NodeId& id, std::uint32_t num_workers) {
  if (!id.mirror_group) {
    return static_cast<std::uint32_t>(id.raw % num_workers);
  }
  const std::uint64_t salt =
      (static_cast<std::uint64_t>(*id.mirror_group) + 1) * 0x9e3779b97f4a7c15ull;
  return static_cast<std::uint32_t>(mix64(id.raw ^ salt) % num_workers);
}

}  // namespace ginfer

#endif  // GINFER_NODE_ID_HPP
