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

#ifndef GINFER_MESSAGE_HPP
#define GINFER_MESSAGE_HPP

#include <cstdint>
#include <variant>

#include "ginfer/aggregate.hpp"
#include "ginfer/node_id.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer {

// A broadcast reference: the payload was published once per destination
// worker; receivers look it up by source id.
struct BroadcastRef {
  NodeId src;
};

// Unit of inter-worker data flow. Dense carries one edge message, Partial a
// sender-side combined reduction, BroadcastRef a pointer into the per-worker
// broadcast registry.
struct Message {
  NodeId dst;
  NodeId src;
  std::variant<DenseVector, AggregateState, BroadcastRef> payload;

  bool is_dense() const { return std::holds_alternative<DenseVector>(payload); }
  bool is_partial() const { return std::holds_alternative<AggregateState>(payload); }
  bool is_broadcast_ref() const { return std::holds_alternative<BroadcastRef>(payload); }
};

// Byte accounting mirrors the external record encoding: 10 bytes per node
// id (u64 raw + u8 mirror flag + u8 group), so in-memory and external
// backends report comparable traffic.
constexpr std::uint64_t kNodeIdWireBytes = 10;
constexpr std::uint64_t kMessageHeaderBytes = 2 * kNodeIdWireBytes + 1;  // dst, src, kind

inline std::uint64_t wire_bytes(const DenseVector& v) {
  return 4 + 4 * static_cast<std::uint64_t>(v.size());
}

inline std::uint64_t wire_bytes(const AggregateState& s) {
  switch (s.kind) {
    case AggregateKind::kSumCount:
      return 1 + wire_bytes(s.sum) + 8;
    case AggregateKind::kMax:
      return 1 + wire_bytes(s.max);
    case AggregateKind::kUnion: {
      std::uint64_t total = 1 + 4;
      for (const auto& [src, payload] : s.items) {
        total += kNodeIdWireBytes + wire_bytes(payload);
      }
      return total;
    }
  }
  return 0;
}

inline std::uint64_t wire_bytes(const Message& m) {
  std::uint64_t payload = 0;
  if (const auto* dense = std::get_if<DenseVector>(&m.payload)) {
    payload = wire_bytes(*dense);
  } else if (const auto* partial = std::get_if<AggregateState>(&m.payload)) {
    payload = wire_bytes(*partial);
  }
  return kMessageHeaderBytes + payload;
}

// One registry entry: source id plus the dense payload.
inline std::uint64_t broadcast_entry_wire_bytes(const DenseVector& payload) {
  return kNodeIdWireBytes + wire_bytes(payload);
}

}  // namespace ginfer

#endif  // GINFER_MESSAGE_HPP
