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

#ifndef GINFER_KHOP_HPP
#define GINFER_KHOP_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/model.hpp"

namespace ginfer {

// Reverse-adjacency index over a graph, built once and shared by all k-hop
// extractions.
class GraphIndex {
 public:
  explicit GraphIndex(const GraphTables& tables) : tables_(&tables) {
    for (const auto& [id, rec] : tables.nodes) {
      in_nbrs_.try_emplace(id);
    }
    for (const auto& [id, rec] : tables.nodes) {
      for (const OutEdge& e : rec.out_nbrs) {
        in_nbrs_.at(e.dst).emplace_back(id, &e.features);
      }
    }
    // map iteration is source-ordered, so per-node in-lists are sorted.
  }

  const GraphTables& tables() const { return *tables_; }

  const std::vector<std::pair<NodeId, const DenseVector*>>& in_edges(const NodeId& id) const {
    return in_nbrs_.at(id);
  }

  std::uint64_t in_degree(const NodeId& id) const { return in_nbrs_.at(id).size(); }

 private:
  const GraphTables* tables_;
  std::map<NodeId, std::vector<std::pair<NodeId, const DenseVector*>>> in_nbrs_;
};

struct KHopNodeInfo {
  DenseVector features;
  std::uint32_t dist = 0;        // shortest-path distance to the target
  std::uint64_t in_degree = 0;   // degrees in the full graph, not the subgraph
  std::uint64_t out_degree = 0;
  bool has_self_loop = false;
};

// The induced attributed subgraph of all nodes within distance k of the
// target (distance measured along reversed edges), plus the full-graph
// degrees needed to reproduce the distributed computation exactly.
struct KHopNeighborhood {
  NodeId target;
  std::uint32_t depth = 0;
  std::map<NodeId, KHopNodeInfo> nodes;
  // Per node: in-edges whose source is inside the neighborhood, sorted by
  // source id. Nodes at the fringe (dist == depth) keep only induced edges.
  std::map<NodeId, std::vector<std::pair<NodeId, DenseVector>>> in_edges;
  std::uint64_t edge_count = 0;
};

inline KHopNeighborhood build_khop(const GraphIndex& index, const NodeId& target,
                                   std::uint32_t depth) {
  KHopNeighborhood hood;
  hood.target = target;
  hood.depth = depth;

  std::deque<NodeId> frontier;
  frontier.push_back(target);
  hood.nodes.emplace(target, KHopNodeInfo{});
  hood.nodes.at(target).dist = 0;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const std::uint32_t d = hood.nodes.at(u).dist;
    if (d == depth) continue;
    for (const auto& [src, feats] : index.in_edges(u)) {
      auto [it, inserted] = hood.nodes.emplace(src, KHopNodeInfo{});
      if (inserted) {
        it->second.dist = d + 1;
        frontier.push_back(src);
      }
    }
  }

  for (auto& [id, info] : hood.nodes) {
    const NodeRecord& rec = index.tables().node(id);
    info.features = rec.features;
    info.in_degree = index.in_degree(id);
    info.out_degree = rec.logical_out_degree;
    info.has_self_loop = rec.has_self_loop;

    auto& edges = hood.in_edges[id];
    for (const auto& [src, feats] : index.in_edges(id)) {
      if (hood.nodes.count(src)) {
        edges.emplace_back(src, *feats);
        ++hood.edge_count;
      }
    }
  }
  return hood;
}

// Work counters for cost comparisons against the layer-wise backends.
struct OracleCounters {
  std::uint64_t message_computations = 0;
  std::uint64_t node_updates = 0;
};

// Local layer-by-layer forward over a k-hop neighborhood; the fused
// scatter/gather path. Identical math and message ordering to the
// distributed engines: at layer k only nodes within depth K-k are updated,
// all of which have their complete in-neighborhood inside the subgraph.
inline Prediction fused_forward(const ModelBundle& model, const KHopNeighborhood& hood,
                                OracleCounters* counters = nullptr) {
  const std::uint32_t k_layers = model.depth();
  if (hood.depth < k_layers) {
    throw std::invalid_argument("fused_forward: neighborhood depth " +
                                std::to_string(hood.depth) + " < model depth " +
                                std::to_string(k_layers));
  }
  std::map<NodeId, DenseVector> state;
  for (const auto& [id, info] : hood.nodes) {
    if (info.features.size() != model.feature_dim) {
      throw std::invalid_argument("fused_forward: feature dim mismatch");
    }
    state.emplace(id, info.features);
  }

  for (std::uint32_t k = 1; k <= k_layers; ++k) {
    const GnnLayer& layer = model.layers[k - 1];
    const bool is_last = k == k_layers;
    std::map<NodeId, DenseVector> next;
    for (const auto& [id, info] : hood.nodes) {
      if (info.dist > k_layers - k) continue;
      AggregateState agg = AggregateState::empty(layer.signature.aggregate_kind);
      for (const auto& [src, edge_feats] : hood.in_edges.at(id)) {
        if (layer.algorithm == GnnAlgorithm::kGat && src.raw == id.raw) {
          continue;  // self term handled locally in apply_node
        }
        const KHopNodeInfo& src_info = hood.nodes.at(src);
        const NodeState src_state{state.at(src), k - 1};
        const NodeContext src_ctx{src_info.out_degree, src_info.has_self_loop};
        agg.add_message(src,
                        apply_edge(layer, src_state, src_ctx, OutEdge{id, edge_feats}));
        if (counters) ++counters->message_computations;
      }
      const NodeContext ctx{info.out_degree, info.has_self_loop};
      const NodeState updated =
          apply_node(layer, NodeState{state.at(id), k - 1}, agg, ctx, is_last);
      next.emplace(id, updated.embedding);
      if (counters) ++counters->node_updates;
    }
    state = std::move(next);
  }
  return predict(model.head, NodeState{state.at(hood.target), k_layers});
}

}  // namespace ginfer

#endif  // GINFER_KHOP_HPP
