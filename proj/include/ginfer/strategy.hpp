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

#ifndef GINFER_STRATEGY_HPP
#define GINFER_STRATEGY_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/message.hpp"
#include "ginfer/node_id.hpp"

namespace ginfer {

// Which load-balancing strategies a run requests. Engines additionally mask
// each one by per-layer eligibility from the signature (partial-gather
// needs a size-reducing aggregate, broadcast needs uniform messages).
struct StrategyConfig {
  bool partial_gather = false;
  bool broadcast = false;
  bool shadow_nodes = false;
  double lambda = 0.1;
  std::optional<std::uint64_t> threshold_override;

  bool any() const { return partial_gather || broadcast || shadow_nodes; }
};

struct HubThreshold {
  double lambda = 0.1;
  std::uint64_t total_edges = 0;
  std::uint32_t total_workers = 0;
  std::uint64_t threshold = 1;
};

// threshold = ceil(lambda * total_edges / total_workers), clamped to >= 1.
// The product is snapped to the nearest integer first so binary rounding of
// lambda (e.g. 0.1 * 1e9 / 1000) cannot push an exact value over the ceil.
inline HubThreshold compute_hub_threshold(double lambda, std::uint64_t total_edges,
                                          std::uint32_t total_workers) {
  if (lambda <= 0.0 || total_workers == 0) {
    throw std::invalid_argument("hub threshold: lambda and workers must be positive");
  }
  HubThreshold t;
  t.lambda = lambda;
  t.total_edges = total_edges;
  t.total_workers = total_workers;
  const double x = lambda * static_cast<double>(total_edges) /
                   static_cast<double>(total_workers);
  const double snapped = std::nearbyint(x);
  double value;
  if (std::fabs(x - snapped) < 1e-6 * std::max(1.0, std::fabs(snapped))) {
    value = snapped;
  } else {
    value = std::ceil(x);
  }
  t.threshold = value < 1.0 ? 1 : static_cast<std::uint64_t>(value);
  return t;
}

inline std::uint64_t resolve_threshold(const StrategyConfig& config,
                                       std::uint64_t total_edges,
                                       std::uint32_t total_workers) {
  if (config.threshold_override) return std::max<std::uint64_t>(1, *config.threshold_override);
  return compute_hub_threshold(config.lambda, total_edges, total_workers).threshold;
}

// ---------------------------------------------------------------------------
// Shadow nodes

struct ShadowPlan {
  std::uint64_t threshold = 0;
  std::map<NodeId, std::uint32_t> mirror_counts;  // physical id -> n (only hubs)
  std::uint64_t rewritten_edges = 0;

  bool empty() const { return mirror_counts.empty(); }
  std::uint32_t groups_of(const NodeId& physical) const {
    auto it = mirror_counts.find(physical);
    return it == mirror_counts.end() ? 1 : it->second;
  }
};

struct ShadowResult {
  ShadowPlan plan;
  GraphTables tables;
};

// Split every node whose out-degree exceeds the threshold into mirrors:
// mirror g owns a round-robin share of the out-edges (in destination order)
// and receives copies of all in-edges. Mirror out-edges targeting a hub are
// expanded to one edge per destination mirror; the group counts iterate to
// a fixed point so that expansion cannot push any rewritten node back over
// the threshold. Results are read from mirror #0 at output time.
inline ShadowResult plan_shadow_nodes(const GraphTables& graph, std::uint64_t threshold,
                                      const DegreeStats& stats) {
  if (threshold == 0) throw std::invalid_argument("shadow plan: threshold must be >= 1");
  ShadowResult result;
  result.plan.threshold = threshold;

  // Fixed point over group counts: expanding edges toward hubs raises some
  // out-degrees, which may create new hubs. Counts only grow, so this
  // terminates.
  std::map<NodeId, std::uint32_t> groups;
  for (const auto& [id, deg] : stats.out_degree) groups[id] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [id, rec] : graph.nodes) {
      std::uint64_t expanded = 0;
      for (const OutEdge& e : rec.out_nbrs) expanded += groups.at(e.dst);
      if (expanded > threshold) {
        const auto need =
            static_cast<std::uint32_t>((expanded + threshold - 1) / threshold);
        if (need > groups.at(id)) {
          groups.at(id) = need;
          changed = true;
        }
      }
    }
  }

  for (const auto& [id, n] : groups) {
    if (n > 1) {
      if (n > 255) {
        throw std::runtime_error("shadow plan: node " + to_string(id) +
                                 " needs " + std::to_string(n) +
                                 " mirrors, exceeding the mirror-group encoding");
      }
      result.plan.mirror_counts.emplace(id, n);
    }
  }

  GraphTables& rewritten = result.tables;
  rewritten.feature_dim = graph.feature_dim;
  rewritten.edge_feature_dim = graph.edge_feature_dim;

  auto mirror_ids = [&](const NodeId& physical) {
    std::vector<NodeId> ids;
    const std::uint32_t n = groups.at(physical);
    if (n == 1) {
      ids.push_back(physical);
    } else {
      for (std::uint32_t g = 0; g < n; ++g) ids.push_back(NodeId{physical.raw, g});
    }
    return ids;
  };

  for (const auto& [id, rec] : graph.nodes) {
    const std::uint32_t n = groups.at(id);

    // Expanded out-edge list in destination order; the source mirror-group
    // assignment walks it round-robin.
    std::vector<OutEdge> expanded;
    for (const OutEdge& e : rec.out_nbrs) {
      for (const NodeId& dst : mirror_ids(e.dst)) {
        expanded.push_back(OutEdge{dst, e.features});
      }
    }

    for (const NodeId& self : mirror_ids(id)) {
      NodeRecord mirror;
      mirror.id = self;
      mirror.features = rec.features;
      mirror.logical_out_degree = rec.logical_out_degree;
      mirror.has_self_loop = rec.has_self_loop;
      rewritten.nodes.emplace(self, std::move(mirror));
    }
    const auto selves = mirror_ids(id);
    for (std::size_t i = 0; i < expanded.size(); ++i) {
      NodeRecord& owner = rewritten.nodes.at(selves[i % n]);
      owner.out_nbrs.push_back(expanded[i]);
    }
    for (const NodeId& self : selves) {
      auto& nbrs = rewritten.nodes.at(self).out_nbrs;
      std::sort(nbrs.begin(), nbrs.end(),
                [](const OutEdge& a, const OutEdge& b) { return a.dst < b.dst; });
      rewritten.num_edges += nbrs.size();
    }
  }
  result.plan.rewritten_edges = rewritten.num_edges;
  return result;
}

// ---------------------------------------------------------------------------
// Broadcast

// Per-worker lookup table of broadcast payloads, valid for one superstep or
// round and cleared at the barrier.
class BroadcastRegistry {
 public:
  void publish(const NodeId& src, DenseVector payload) {
    auto [it, inserted] = entries_.emplace(src, std::move(payload));
    if (!inserted) {
      throw std::logic_error("broadcast registry: duplicate entry for " + to_string(src));
    }
  }

  const DenseVector& resolve(const NodeId& src) const {
    auto it = entries_.find(src);
    if (it == entries_.end()) {
      throw std::logic_error("broadcast registry: unresolvable reference to " +
                             to_string(src));
    }
    return it->second;
  }

  bool contains(const NodeId& src) const { return entries_.count(src) != 0; }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  std::map<NodeId, DenseVector> entries_;
};

struct BroadcastEncoding {
  // One payload publication per destination worker hosting at least one
  // out-neighbor, in worker order.
  std::vector<std::pair<std::uint32_t, DenseVector>> registry_entries;
  std::vector<Message> refs;  // one per out-edge
};

// Replace per-edge dense messages from `src` with one registry entry per
// destination worker plus a small reference per edge.
inline BroadcastEncoding broadcast_encode(const NodeId& src, const DenseVector& payload,
                                          const std::vector<OutEdge>& out_edges,
                                          std::uint32_t num_workers) {
  BroadcastEncoding enc;
  std::set<std::uint32_t> workers;
  for (const OutEdge& e : out_edges) {
    workers.insert(partition_of(e.dst, num_workers));
    enc.refs.push_back(Message{e.dst, src, BroadcastRef{src}});
  }
  for (std::uint32_t w : workers) {
    enc.registry_entries.emplace_back(w, payload);
  }
  return enc;
}

}  // namespace ginfer

#endif  // GINFER_STRATEGY_HPP
