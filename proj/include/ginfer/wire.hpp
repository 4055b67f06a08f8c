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

#ifndef GINFER_WIRE_HPP
#define GINFER_WIRE_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "ginfer/aggregate.hpp"
#include "ginfer/node_id.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer::wire {

// Explicit little-endian encoding so run files are bit-exact across
// platforms; determinism tests hash them.

using Buffer = std::vector<std::uint8_t>;

inline void put_u8(Buffer& b, std::uint8_t v) { b.push_back(v); }

inline void put_u32(Buffer& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(Buffer& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(Buffer& b, float v) {
  put_u32(b, std::bit_cast<std::uint32_t>(v));
}

inline void put_node_id(Buffer& b, const NodeId& id) {
  put_u64(b, id.raw);
  put_u8(b, id.mirror_group ? 1 : 0);
  put_u8(b, id.mirror_group ? static_cast<std::uint8_t>(*id.mirror_group) : 0);
}

inline void put_vector(Buffer& b, const DenseVector& v) {
  put_u32(b, static_cast<std::uint32_t>(v.size()));
  for (float x : v) put_f32(b, x);
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit Reader(const Buffer& b) : Reader(b.data(), b.size()) {}

  std::uint8_t get_u8() {
    require(1);
    return data_[pos_++];
  }
  std::uint32_t get_u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get_u32()); }

  NodeId get_node_id() {
    NodeId id;
    id.raw = get_u64();
    const bool has_group = get_u8() != 0;
    const std::uint8_t group = get_u8();
    if (has_group) id.mirror_group = group;
    return id;
  }

  DenseVector get_vector() {
    const std::uint32_t dim = get_u32();
    require(4ull * dim);
    DenseVector v(dim);
    for (std::uint32_t i = 0; i < dim; ++i) v[i] = get_f32();
    return v;
  }

  bool done() const { return pos_ == size_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void require(std::uint64_t n) const {
    if (pos_ + n > size_) throw std::runtime_error("wire: truncated record payload");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline void put_aggregate(Buffer& b, const AggregateState& s) {
  put_u8(b, static_cast<std::uint8_t>(s.kind));
  switch (s.kind) {
    case AggregateKind::kSumCount:
      put_vector(b, s.sum);
      put_u64(b, s.count);
      break;
    case AggregateKind::kMax:
      put_vector(b, s.max);
      break;
    case AggregateKind::kUnion:
      throw std::logic_error("wire: union aggregates never travel as partials");
  }
}

inline AggregateState get_aggregate(Reader& r) {
  const auto kind = static_cast<AggregateKind>(r.get_u8());
  AggregateState s = AggregateState::empty(kind);
  switch (kind) {
    case AggregateKind::kSumCount:
      s.sum = r.get_vector();
      s.count = r.get_u64();
      break;
    case AggregateKind::kMax:
      s.max = r.get_vector();
      break;
    default:
      throw std::runtime_error("wire: bad aggregate kind byte");
  }
  return s;
}

}  // namespace ginfer::wire

#endif  // GINFER_WIRE_HPP
