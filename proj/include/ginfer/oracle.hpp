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

#ifndef GINFER_ORACLE_HPP
#define GINFER_ORACLE_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <set>
#include <thread>
#include <vector>

#include "ginfer/khop.hpp"
#include "ginfer/metrics.hpp"
#include "ginfer/output_io.hpp"
#include "ginfer/rng.hpp"

namespace ginfer {

// Per-node k-hop forward over the full neighborhood (no sampling). This is
// the reference the layer-wise engines are checked against: slow because
// overlapping neighborhoods are recomputed per node, exact because each
// neighborhood carries complete in-edge information.
inline std::vector<OutputRow> oracle_khop_forward(const GraphTables& tables,
                                                  const ModelBundle& model,
                                                  const std::vector<NodeId>& targets,
                                                  OracleCounters* counters = nullptr) {
  const GraphIndex index(tables);
  std::vector<OutputRow> rows(targets.size());
  std::vector<OracleCounters> per_target(counters ? targets.size() : 0);

  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t num_chunks = std::max<std::size_t>(1, std::min<std::size_t>(
      hw == 0 ? 4 : hw, targets.size()));
  const std::size_t chunk = (targets.size() + num_chunks - 1) / num_chunks;

  std::vector<std::future<void>> futures;
  for (std::size_t begin = 0; begin < targets.size(); begin += chunk) {
    const std::size_t end = std::min(begin + chunk, targets.size());
    futures.push_back(std::async(std::launch::async, [&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        const KHopNeighborhood hood = build_khop(index, targets[i], model.depth());
        OracleCounters* c = counters ? &per_target[i] : nullptr;
        const Prediction p = fused_forward(model, hood, c);
        rows[i] = OutputRow{targets[i].physical(), p.predicted_class, p.logits};
      }
    }));
  }
  for (auto& f : futures) f.get();

  if (counters) {
    for (const OracleCounters& c : per_target) {
      counters->message_computations += c.message_computations;
      counters->node_updates += c.node_updates;
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const OutputRow& a, const OutputRow& b) { return a.id < b.id; });
  return rows;
}

inline std::vector<OutputRow> oracle_khop_forward(const GraphTables& tables,
                                                  const ModelBundle& model,
                                                  OracleCounters* counters = nullptr) {
  std::vector<NodeId> targets;
  targets.reserve(tables.nodes.size());
  for (const auto& [id, rec] : tables.nodes) targets.push_back(id);
  return oracle_khop_forward(tables, model, targets, counters);
}

namespace detail {

// Sampled analogue of build_khop: at each expansion at most `fanout`
// in-neighbors survive, drawn without replacement. This reproduces the
// consistency problem of sampling-based inference pipelines on purpose.
inline KHopNeighborhood build_sampled_khop(const GraphIndex& index, const NodeId& target,
                                           std::uint32_t depth, std::uint64_t fanout,
                                           SplitMix64& rng) {
  KHopNeighborhood hood;
  hood.target = target;
  hood.depth = depth;

  std::deque<NodeId> frontier;
  frontier.push_back(target);
  hood.nodes.emplace(target, KHopNodeInfo{});
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const std::uint32_t d = hood.nodes.at(u).dist;
    if (d == depth) continue;

    const auto& all_in = index.in_edges(u);
    auto& sampled = hood.in_edges[u];
    if (all_in.size() <= fanout) {
      for (const auto& [src, feats] : all_in) sampled.emplace_back(src, *feats);
    } else {
      // Partial Fisher-Yates over a local index vector.
      std::vector<std::size_t> order(all_in.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::vector<std::size_t> chosen;
      for (std::uint64_t t = 0; t < fanout; ++t) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(order.size() - t));
        chosen.push_back(order[j]);
        std::swap(order[j], order[order.size() - 1 - t]);
      }
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t i : chosen) sampled.emplace_back(all_in[i].first, *all_in[i].second);
    }
    for (const auto& [src, feats] : sampled) {
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
    info.out_degree = rec.logical_out_degree;
    info.has_self_loop = rec.has_self_loop;
    auto& edges = hood.in_edges[id];  // fringe nodes end up with no edges
    info.in_degree = edges.size();    // the sampled pipeline sees sampled degrees
    hood.edge_count += edges.size();
  }
  return hood;
}

}  // namespace detail

// Run sampled inference `num_runs` times with per-run seeds and report how
// many distinct classes each node collects. With a fanout below the maximum
// in-degree this demonstrates the run-to-run inconsistency of sampling.
inline ComparisonReport sampled_inference(const GraphTables& tables,
                                          const ModelBundle& model, std::uint64_t fanout,
                                          std::uint32_t num_runs, std::uint64_t seed) {
  if (fanout == 0) throw std::invalid_argument("sampled_inference: fanout must be >= 1");
  const GraphIndex index(tables);
  std::map<NodeId, std::set<std::uint32_t>> classes_seen;

  std::vector<NodeId> targets;
  for (const auto& [id, rec] : tables.nodes) targets.push_back(id);

  for (std::uint32_t run = 0; run < num_runs; ++run) {
    SplitMix64 run_rng(mix64(seed ^ (0x5851f42d4c957f2dull * (run + 1))));
    for (const NodeId& target : targets) {
      KHopNeighborhood hood =
          detail::build_sampled_khop(index, target, model.depth(), fanout, run_rng);
      const Prediction p = fused_forward(model, hood);
      classes_seen[target].insert(p.predicted_class);
    }
  }

  ComparisonReport report;
  for (const auto& [id, classes] : classes_seen) {
    ++report.nodes_by_class_count[static_cast<std::uint32_t>(classes.size())];
  }
  return report;
}

// Exact comparison of two output tables over the same id set. The report
// carries the exact maxima; thresholding against an atol happens in
// comparison_passes so callers can reuse one report at several tolerances.
inline ComparisonReport compare_outputs(const std::vector<OutputRow>& a,
                                        const std::vector<OutputRow>& b) {
  std::map<NodeId, const OutputRow*> b_index;
  for (const OutputRow& row : b) b_index.emplace(row.id, &row);
  if (a.size() != b.size() || b_index.size() != b.size()) {
    throw std::runtime_error("compare_outputs: id sets differ");
  }
  ComparisonReport report;
  for (const OutputRow& row : a) {
    auto it = b_index.find(row.id);
    if (it == b_index.end()) {
      throw std::runtime_error("compare_outputs: id sets differ at " + to_string(row.id));
    }
    const OutputRow& other = *it->second;
    if (row.logits.size() != other.logits.size()) {
      throw std::runtime_error("compare_outputs: logit dimensions differ at " +
                               to_string(row.id));
    }
    for (std::size_t i = 0; i < row.logits.size(); ++i) {
      const double diff = std::fabs(static_cast<double>(row.logits[i]) -
                                    static_cast<double>(other.logits[i]));
      report.max_abs_diff = std::max(report.max_abs_diff, diff);
    }
    const bool class_match = row.predicted_class == other.predicted_class;
    if (!class_match) ++report.mismatched_class_count;
    ++report.nodes_by_class_count[class_match ? 1 : 2];
  }
  return report;
}

inline bool comparison_passes(const ComparisonReport& report, double atol) {
  return report.max_abs_diff <= atol && report.mismatched_class_count == 0;
}

}  // namespace ginfer

#endif  // GINFER_ORACLE_HPP
