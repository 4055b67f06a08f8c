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

#ifndef GINFER_GRAPH_HPP
#define GINFER_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginfer/io_util.hpp"
#include "ginfer/node_id.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer {

struct OutEdge {
  NodeId dst;
  DenseVector features;
};

struct NodeRecord {
  NodeId id;
  DenseVector features;
  std::vector<OutEdge> out_nbrs;  // sorted by destination id

  // Out-degree of the node in the original graph. Equals out_nbrs.size()
  // for physical nodes; shadow mirrors keep the degree of the node they
  // were split from, which sender-side normalization (GCN) depends on.
  std::uint64_t logical_out_degree = 0;
  bool has_self_loop = false;
};

struct EdgeRecord {
  NodeId src;
  NodeId dst;
  DenseVector features;
};

// A loaded graph: node records with out-adjacency materialized. Immutable
// once built; safe to share read-only across workers.
struct GraphTables {
  std::map<NodeId, NodeRecord> nodes;
  std::uint64_t num_edges = 0;
  std::uint32_t feature_dim = 0;
  std::uint32_t edge_feature_dim = 0;

  const NodeRecord& node(const NodeId& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) {
      throw std::out_of_range("unknown node " + to_string(id));
    }
    return it->second;
  }
};

struct IngestOptions {
  bool add_reverse_edges = false;
  bool add_self_loops = false;
  bool allow_self_loops = false;  // implied by add_self_loops
};

namespace detail {

inline std::runtime_error ingest_error(const std::filesystem::path& path,
                                       std::size_t line_no, const std::string& what) {
  return std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

// Read the node and edge TSV tables and materialize per-node out-adjacency.
//
// Node table rows: <id>\t<f1,...,fD>\t<nbr1,nbr2,...>   (neighbor list may be empty)
// Edge table rows: <src>\t<dst>\t<e1,...,eF>            (feature list may be empty)
//
// The edge table is the authority on edge features. Neighbor ids listed in
// the node table but absent from the edge table become edges with zero
// features, so a node table alone is a valid graph.
inline GraphTables ingest_tables(const std::filesystem::path& node_table_path,
                                 const std::filesystem::path& edge_table_path,
                                 const IngestOptions& options = {}) {
  GraphTables g;
  const bool self_loops_ok = options.allow_self_loops || options.add_self_loops;

  std::ifstream node_file(node_table_path);
  if (!node_file) {
    throw std::runtime_error("cannot open node table " + node_table_path.string());
  }
  bool feature_dim_set = false;
  std::vector<std::pair<NodeId, std::vector<NodeId>>> listed_nbrs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(node_file, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_view(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw detail::ingest_error(node_table_path, line_no, "expected 2 or 3 fields");
    }
    auto id = parse_node_id(fields[0]);
    if (!id) {
      throw detail::ingest_error(node_table_path, line_no, "bad node id");
    }
    NodeRecord rec;
    rec.id = *id;
    if (!parse_float_list(fields[1], rec.features)) {
      throw detail::ingest_error(node_table_path, line_no, "bad feature list");
    }
    if (!feature_dim_set) {
      g.feature_dim = static_cast<std::uint32_t>(rec.features.size());
      feature_dim_set = true;
    } else if (rec.features.size() != g.feature_dim) {
      throw detail::ingest_error(
          node_table_path, line_no,
          "feature dimension mismatch: got " + std::to_string(rec.features.size()) +
              ", expected " + std::to_string(g.feature_dim));
    }
    std::vector<NodeId> nbrs;
    if (fields.size() == 3 && !fields[2].empty()) {
      for (std::string_view nbr_text : split_view(fields[2], ',')) {
        auto nbr = parse_node_id(nbr_text);
        if (!nbr) {
          throw detail::ingest_error(node_table_path, line_no, "bad neighbor id");
        }
        nbrs.push_back(*nbr);
      }
    }
    if (!g.nodes.emplace(rec.id, std::move(rec)).second) {
      throw detail::ingest_error(node_table_path, line_no,
                                 "duplicate node id " + to_string(*id));
    }
    if (!nbrs.empty()) listed_nbrs.emplace_back(*id, std::move(nbrs));
  }

  // Edge set under construction, keyed (src, dst) to reject duplicates.
  std::map<std::pair<NodeId, NodeId>, DenseVector> edges;
  bool edge_dim_set = false;

  std::ifstream edge_file(edge_table_path);
  if (!edge_file) {
    throw std::runtime_error("cannot open edge table " + edge_table_path.string());
  }
  line_no = 0;
  while (std::getline(edge_file, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_view(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw detail::ingest_error(edge_table_path, line_no, "expected 2 or 3 fields");
    }
    auto src = parse_node_id(fields[0]);
    auto dst = parse_node_id(fields[1]);
    if (!src || !dst) {
      throw detail::ingest_error(edge_table_path, line_no, "bad edge endpoint id");
    }
    DenseVector feats;
    if (fields.size() == 3 && !parse_float_list(fields[2], feats)) {
      throw detail::ingest_error(edge_table_path, line_no, "bad edge feature list");
    }
    if (!edge_dim_set && !feats.empty()) {
      g.edge_feature_dim = static_cast<std::uint32_t>(feats.size());
      edge_dim_set = true;
    } else if (!feats.empty() && feats.size() != g.edge_feature_dim) {
      throw detail::ingest_error(edge_table_path, line_no, "edge feature dimension mismatch");
    }
    if (*src == *dst && !self_loops_ok) {
      throw detail::ingest_error(edge_table_path, line_no,
                                 "self-loop " + to_string(*src) + " not enabled");
    }
    if (!g.nodes.count(*src) || !g.nodes.count(*dst)) {
      throw detail::ingest_error(edge_table_path, line_no, "edge references unknown node");
    }
    if (!edges.emplace(std::make_pair(*src, *dst), std::move(feats)).second) {
      throw detail::ingest_error(edge_table_path, line_no,
                                 "duplicate edge " + to_string(*src) + " -> " + to_string(*dst));
    }
  }

  // Fold in adjacency that only the node table mentions.
  for (const auto& [src, nbrs] : listed_nbrs) {
    for (const NodeId& dst : nbrs) {
      if (!g.nodes.count(dst)) {
        throw std::runtime_error("node table lists unknown neighbor " + to_string(dst) +
                                 " for node " + to_string(src));
      }
      if (src == dst && !self_loops_ok) {
        throw std::runtime_error("self-loop " + to_string(src) + " not enabled");
      }
      edges.try_emplace(std::make_pair(src, dst),
                        DenseVector(g.edge_feature_dim, 0.0f));
    }
  }

  if (options.add_reverse_edges) {
    auto snapshot = edges;  // iterate the original set only
    for (const auto& [key, feats] : snapshot) {
      edges.try_emplace(std::make_pair(key.second, key.first), feats);
    }
  }
  if (options.add_self_loops) {
    for (const auto& [id, rec] : g.nodes) {
      edges.try_emplace(std::make_pair(id, id), DenseVector(g.edge_feature_dim, 0.0f));
    }
  }

  for (auto& [key, feats] : edges) {
    NodeRecord& src_rec = g.nodes.at(key.first);
    src_rec.out_nbrs.push_back(OutEdge{key.second, std::move(feats)});
    if (key.first == key.second) src_rec.has_self_loop = true;
    ++g.num_edges;
  }
  // Map iteration above is (src, dst)-ordered, so per-node lists arrive
  // sorted by destination already.
  for (auto& [id, rec] : g.nodes) {
    rec.logical_out_degree = rec.out_nbrs.size();
  }
  return g;
}

inline void write_node_table(const GraphTables& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [id, rec] : g.nodes) {
    out << to_string(id) << '\t' << format_float_list(rec.features) << '\t';
    for (std::size_t i = 0; i < rec.out_nbrs.size(); ++i) {
      if (i) out << ',';
      out << to_string(rec.out_nbrs[i].dst);
    }
    out << '\n';
  }
}

inline void write_edge_table(const GraphTables& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [id, rec] : g.nodes) {
    for (const OutEdge& e : rec.out_nbrs) {
      out << to_string(id) << '\t' << to_string(e.dst) << '\t'
          << format_float_list(e.features) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Degree statistics

struct DegreeStats {
  std::map<NodeId, std::uint64_t> in_degree;
  std::map<NodeId, std::uint64_t> out_degree;
  std::uint64_t total_edges = 0;
  std::uint64_t max_in = 0;
  std::uint64_t max_out = 0;
  double mean_in = 0.0;
  double mean_out = 0.0;
  // Log-spaced histogram: bucket b counts nodes with floor(log2(d+1)) == b.
  std::vector<std::uint64_t> in_histogram;
  std::vector<std::uint64_t> out_histogram;

  std::uint64_t sum_in() const {
    std::uint64_t s = 0;
    for (const auto& [id, d] : in_degree) s += d;
    return s;
  }
  std::uint64_t sum_out() const {
    std::uint64_t s = 0;
    for (const auto& [id, d] : out_degree) s += d;
    return s;
  }

  static std::uint64_t percentile(const std::vector<std::uint64_t>& sorted, double p) {
    if (sorted.empty()) return 0;
    const double rank = p / 100.0 * static_cast<double>(sorted.size());
    std::size_t idx = rank <= 1.0 ? 0 : static_cast<std::size_t>(std::ceil(rank)) - 1;
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    return sorted[idx];
  }
};

inline DegreeStats compute_degree_stats(const GraphTables& g) {
  DegreeStats s;
  for (const auto& [id, rec] : g.nodes) {
    s.out_degree[id] = rec.out_nbrs.size();
    s.in_degree.try_emplace(id, 0);
  }
  for (const auto& [id, rec] : g.nodes) {
    for (const OutEdge& e : rec.out_nbrs) {
      ++s.in_degree.at(e.dst);
      ++s.total_edges;
    }
  }
  auto bucket_of = [](std::uint64_t d) {
    std::size_t b = 0;
    for (std::uint64_t x = d + 1; x > 1; x >>= 1) ++b;
    return b;
  };
  for (const auto& [id, d] : s.in_degree) {
    s.max_in = std::max(s.max_in, d);
    if (s.in_histogram.size() <= bucket_of(d)) s.in_histogram.resize(bucket_of(d) + 1, 0);
    ++s.in_histogram[bucket_of(d)];
  }
  for (const auto& [id, d] : s.out_degree) {
    s.max_out = std::max(s.max_out, d);
    if (s.out_histogram.size() <= bucket_of(d)) s.out_histogram.resize(bucket_of(d) + 1, 0);
    ++s.out_histogram[bucket_of(d)];
  }
  if (!g.nodes.empty()) {
    s.mean_in = static_cast<double>(s.sum_in()) / static_cast<double>(g.nodes.size());
    s.mean_out = static_cast<double>(s.sum_out()) / static_cast<double>(g.nodes.size());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Partitions

// Forward-declared here; engines fill state in as they run.
struct NodeState {
  DenseVector embedding;
  std::uint32_t layer_index = 0;
};

struct GraphPartition {
  std::uint32_t worker_id = 0;
  std::map<NodeId, NodeRecord> nodes;
  std::map<NodeId, NodeState> node_state;
  std::map<std::pair<NodeId, NodeId>, DenseVector> edge_state;
};

// Split the node set by partition_of. Each partition holds its nodes and
// all of their out-edges, and nothing else.
inline std::vector<GraphPartition> build_partitions(const GraphTables& g,
                                                    std::uint32_t num_workers) {
  if (num_workers == 0) throw std::invalid_argument("num_workers must be >= 1");
  std::vector<GraphPartition> parts(num_workers);
  for (std::uint32_t w = 0; w < num_workers; ++w) parts[w].worker_id = w;
  for (const auto& [id, rec] : g.nodes) {
    parts[partition_of(id, num_workers)].nodes.emplace(id, rec);
  }
  return parts;
}

}  // namespace ginfer

#endif  // GINFER_GRAPH_HPP
