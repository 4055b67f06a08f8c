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

#ifndef GINFER_AGGREGATE_HPP
#define GINFER_AGGREGATE_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ginfer/node_id.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer {

// The reduction performed over a node's in-edge messages. Only reductions
// that commute and associate live here; anything else (e.g. attention
// weighting) happens in the node-update step on a kUnion of raw messages.
// kSumCount and kMax shrink their input and are therefore eligible for
// sender-side combining; kUnion is not.
enum class AggregateKind : std::uint8_t { kSumCount = 0, kMax = 1, kUnion = 2 };

inline const char* to_string(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::kSumCount: return "sum_count";
    case AggregateKind::kMax: return "max";
    case AggregateKind::kUnion: return "union";
  }
  return "?";
}

struct AggregateState {
  AggregateKind kind = AggregateKind::kSumCount;
  DenseVector sum;           // kSumCount: elementwise sum of messages
  std::uint64_t count = 0;   // kSumCount: number of messages folded in
  DenseVector max;           // kMax: elementwise max; empty = identity
  std::vector<std::pair<NodeId, DenseVector>> items;  // kUnion

  static AggregateState empty(AggregateKind kind) {
    AggregateState s;
    s.kind = kind;
    return s;
  }

  bool is_empty() const {
    switch (kind) {
      case AggregateKind::kSumCount: return count == 0;
      case AggregateKind::kMax: return max.empty();
      case AggregateKind::kUnion: return items.empty();
    }
    return true;
  }

  // Fold a single dense message into the state.
  void add_message(const NodeId& src, const DenseVector& payload) {
    switch (kind) {
      case AggregateKind::kSumCount:
        if (sum.empty()) {
          sum = payload;
        } else {
          add_in_place(sum, payload);
        }
        ++count;
        break;
      case AggregateKind::kMax:
        if (max.empty()) {
          max = payload;
        } else {
          if (max.size() != payload.size())
            throw std::invalid_argument("aggregate: message dimension mismatch");
          for (std::size_t i = 0; i < max.size(); ++i)
            max[i] = std::max(max[i], payload[i]);
        }
        break;
      case AggregateKind::kUnion:
        items.emplace_back(src, payload);
        break;
    }
  }
};

// Merge two partial reductions of the same kind. Commutative and
// associative up to float tolerance; exact for kUnion up to the canonical
// reordering applied by finalize.
inline AggregateState aggregate_merge(AggregateState a, const AggregateState& b) {
  if (a.kind != b.kind) {
    throw std::invalid_argument("aggregate_merge: kind mismatch");
  }
  switch (a.kind) {
    case AggregateKind::kSumCount:
      if (a.sum.empty()) {
        a.sum = b.sum;
      } else if (!b.sum.empty()) {
        add_in_place(a.sum, b.sum);
      }
      a.count += b.count;
      break;
    case AggregateKind::kMax:
      if (a.max.empty()) {
        a.max = b.max;
      } else if (!b.max.empty()) {
        if (a.max.size() != b.max.size())
          throw std::invalid_argument("aggregate_merge: dimension mismatch");
        for (std::size_t i = 0; i < a.max.size(); ++i)
          a.max[i] = std::max(a.max[i], b.max[i]);
      }
      break;
    case AggregateKind::kUnion:
      a.items.insert(a.items.end(), b.items.begin(), b.items.end());
      break;
  }
  return a;
}

// Finalize a kSumCount state to the mean, or a kMax state to its vector.
// An empty in-neighborhood finalizes to the zero vector of the given
// dimension so downstream layers stay total.
inline DenseVector aggregate_finalize(const AggregateState& state,
                                      std::size_t dim_if_empty) {
  switch (state.kind) {
    case AggregateKind::kSumCount: {
      if (state.count == 0) return DenseVector(dim_if_empty, 0.0f);
      DenseVector mean(state.sum.size());
      const float inv = 1.0f / static_cast<float>(state.count);
      for (std::size_t i = 0; i < state.sum.size(); ++i) mean[i] = state.sum[i] * inv;
      return mean;
    }
    case AggregateKind::kMax:
      if (state.max.empty()) return DenseVector(dim_if_empty, 0.0f);
      return state.max;
    case AggregateKind::kUnion:
      throw std::invalid_argument("aggregate_finalize: union finalizes to a list");
  }
  return {};
}

// Canonical form of a union aggregate: items sorted by source id.
inline std::vector<std::pair<NodeId, DenseVector>> aggregate_finalize_union(
    AggregateState state) {
  if (state.kind != AggregateKind::kUnion) {
    throw std::invalid_argument("aggregate_finalize_union: not a union state");
  }
  std::stable_sort(state.items.begin(), state.items.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return std::move(state.items);
}

}  // namespace ginfer

#endif  // GINFER_AGGREGATE_HPP
