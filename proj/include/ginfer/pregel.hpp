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

#ifndef GINFER_PREGEL_HPP
#define GINFER_PREGEL_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/message.hpp"
#include "ginfer/metrics.hpp"
#include "ginfer/model.hpp"
#include "ginfer/output_io.hpp"
#include "ginfer/strategy.hpp"

namespace ginfer {

struct PregelOptions {
  // Workers run on threads between barriers. The sequential mode exists to
  // probe scheduling-order independence: results must be byte-identical
  // either way.
  bool parallel = true;
  bool reverse_worker_order = false;
  bool capture_final_states = false;
};

struct InferenceResult {
  std::vector<OutputRow> outputs;  // one row per physical node, sorted by id
  RunMetrics metrics;
  // Final embeddings keyed by full node id (mirrors included); filled only
  // when requested.
  std::map<NodeId, DenseVector> final_states;
};

// Bulk-synchronous inference engine: W logical workers hold hash partitions
// in memory and run one GNN layer per superstep. Superstep 0 initializes
// embeddings and scatters; superstep K applies the last layer and the
// prediction head. Messages sent in step t are delivered only at the
// barrier before step t+1.
class PregelEngine {
 public:
  PregelEngine(const GraphTables& tables, const ModelBundle& model,
               std::uint32_t num_workers, const StrategyConfig& config,
               std::uint64_t hub_threshold, const PregelOptions& options = {})
      : tables_(tables),
        model_(model),
        num_workers_(num_workers),
        config_(config),
        threshold_(hub_threshold),
        options_(options) {
    if (num_workers == 0) throw std::invalid_argument("pregel: num_workers must be >= 1");
    model.validate();
    if (tables.feature_dim != model.feature_dim) {
      throw std::invalid_argument("pregel: graph feature dim != model feature dim");
    }
  }

  InferenceResult run() {
    const std::uint32_t k_layers = model_.depth();
    const std::uint32_t num_steps = k_layers + 1;

    workers_.clear();
    workers_.resize(num_workers_);
    {
      auto parts = build_partitions(tables_, num_workers_);
      for (std::uint32_t w = 0; w < num_workers_; ++w) {
        workers_[w].part = std::move(parts[w]);
        workers_[w].outbox.resize(num_workers_);
      }
    }
    std::set<std::uint64_t> physical_ids;
    for (const auto& [id, rec] : tables_.nodes) physical_ids.insert(id.raw);

    InferenceResult result;
    result.metrics = RunMetrics::make(num_workers_, num_steps);

    for (std::uint32_t step = 0; step < num_steps; ++step) {
      run_compute_phase(step, result.metrics);
      deliver(step, result.metrics);
    }

    for (Worker& w : workers_) {
      result.outputs.insert(result.outputs.end(), w.outputs.begin(), w.outputs.end());
      if (options_.capture_final_states) {
        for (auto& [id, state] : w.part.node_state) {
          result.final_states.emplace(id, state.embedding);
        }
      }
    }
    std::sort(result.outputs.begin(), result.outputs.end(),
              [](const OutputRow& a, const OutputRow& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < result.outputs.size(); ++i) {
      if (result.outputs[i].id == result.outputs[i + 1].id) {
        throw std::logic_error("pregel: duplicate output row for " +
                               to_string(result.outputs[i].id));
      }
    }
    if (result.outputs.size() != physical_ids.size()) {
      throw std::logic_error("pregel: output rows != physical node count");
    }
    return result;
  }

 private:
  struct InboxMessage {
    Message msg;
    std::uint32_t origin_worker = 0;
  };

  struct Worker {
    GraphPartition part;
    std::map<NodeId, std::vector<InboxMessage>> inbox;
    std::vector<std::vector<Message>> outbox;  // bucket per destination worker
    std::vector<std::pair<std::uint32_t, std::pair<NodeId, DenseVector>>> publications;
    BroadcastRegistry registry;
    std::vector<OutputRow> outputs;
  };

  void run_compute_phase(std::uint32_t step, RunMetrics& metrics) {
    if (options_.parallel && num_workers_ > 1) {
      std::vector<std::thread> threads;
      threads.reserve(num_workers_);
      for (std::uint32_t w = 0; w < num_workers_; ++w) {
        threads.emplace_back([this, w, step, &metrics] { compute_worker(w, step, metrics); });
      }
      for (auto& t : threads) t.join();
    } else {
      for (std::uint32_t i = 0; i < num_workers_; ++i) {
        const std::uint32_t w = options_.reverse_worker_order ? num_workers_ - 1 - i : i;
        compute_worker(w, step, metrics);
      }
    }
  }

  // Canonical gather order: sender-combined partials in worker-id order
  // (delivery appends them that way), then dense and resolved broadcast
  // messages sorted by source id.
  AggregateState fold_inbox(const Worker& worker, const std::vector<InboxMessage>& msgs,
                            AggregateKind kind) const {
    AggregateState agg = AggregateState::empty(kind);
    for (const InboxMessage& im : msgs) {
      if (im.msg.is_partial()) {
        agg = aggregate_merge(std::move(agg), std::get<AggregateState>(im.msg.payload));
      }
    }
    std::vector<const InboxMessage*> dense;
    dense.reserve(msgs.size());
    for (const InboxMessage& im : msgs) {
      if (!im.msg.is_partial()) dense.push_back(&im);
    }
    std::sort(dense.begin(), dense.end(), [](const InboxMessage* a, const InboxMessage* b) {
      return a->msg.src < b->msg.src;
    });
    for (const InboxMessage* im : dense) {
      if (im->msg.is_dense()) {
        agg.add_message(im->msg.src, std::get<DenseVector>(im->msg.payload));
      } else {
        agg.add_message(im->msg.src,
                        worker.registry.resolve(std::get<BroadcastRef>(im->msg.payload).src));
      }
    }
    return agg;
  }

  void compute_worker(std::uint32_t w, std::uint32_t step, RunMetrics& metrics) {
    const auto start = std::chrono::steady_clock::now();
    Worker& worker = workers_[w];
    StepMetrics& cell = metrics.at(w, step);
    const std::uint32_t k_layers = model_.depth();
    const bool is_init = step == 0;
    const bool is_predict = step == k_layers;

    for (auto& [id, rec] : worker.part.nodes) {
      NodeState state;
      if (is_init) {
        state = init_embedding(model_.layers[0], rec);
      } else {
        const GnnLayer& layer = model_.layers[step - 1];
        static const std::vector<InboxMessage> kNoMessages;
        auto inbox_it = worker.inbox.find(id);
        const auto& msgs = inbox_it == worker.inbox.end() ? kNoMessages : inbox_it->second;
        cell.max_node_msgs_in =
            std::max<std::uint64_t>(cell.max_node_msgs_in, msgs.size());
        const AggregateState agg = fold_inbox(worker, msgs, layer.signature.aggregate_kind);
        const NodeContext ctx{rec.logical_out_degree, rec.has_self_loop};
        state = apply_node(layer, worker.part.node_state.at(id), agg, ctx, is_predict);
      }
      worker.part.node_state[id] = state;

      if (!is_predict) {
        scatter(worker, rec, worker.part.node_state.at(id), model_.layers[step], cell);
      } else if (!id.is_mirror() || *id.mirror_group == 0) {
        const Prediction p = predict(model_.head, worker.part.node_state.at(id));
        worker.outputs.push_back(OutputRow{id.physical(), p.predicted_class, p.logits});
      }
    }

    finish_outboxes(worker, model_.layers[std::min(step, k_layers - 1)], is_predict, cell);
    cell.wall_ms += std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  }

  void scatter(Worker& worker, const NodeRecord& rec, const NodeState& state,
               const GnnLayer& next_layer, StepMetrics& cell) {
    if (rec.out_nbrs.empty()) return;
    const NodeContext ctx{rec.logical_out_degree, rec.has_self_loop};
    const bool skip_self = next_layer.algorithm == GnnAlgorithm::kGat;
    const bool uniform = next_layer.signature.message_uniform_over_out_edges;
    const bool use_broadcast = config_.broadcast && uniform &&
                               rec.out_nbrs.size() > threshold_;

    DenseVector shared_payload;
    if (uniform) {
      shared_payload = apply_edge(next_layer, state, ctx, rec.out_nbrs.front());
    }

    if (use_broadcast) {
      std::set<std::uint32_t> dest_workers;
      for (const OutEdge& e : rec.out_nbrs) {
        if (skip_self && e.dst.raw == rec.id.raw) continue;
        dest_workers.insert(partition_of(e.dst, num_workers_));
        worker.outbox[partition_of(e.dst, num_workers_)].push_back(
            Message{e.dst, rec.id, BroadcastRef{rec.id}});
      }
      for (std::uint32_t dw : dest_workers) {
        worker.publications.emplace_back(dw, std::make_pair(rec.id, shared_payload));
        ++cell.bcast_payloads_out;
        cell.bytes_out += broadcast_entry_wire_bytes(shared_payload);
      }
      return;
    }

    for (const OutEdge& e : rec.out_nbrs) {
      if (skip_self && e.dst.raw == rec.id.raw) continue;
      const DenseVector& payload =
          uniform ? shared_payload : apply_edge(next_layer, state, ctx, e);
      worker.outbox[partition_of(e.dst, num_workers_)].push_back(
          Message{e.dst, rec.id, payload});
    }
  }

  // Sender-side combining, then outbound accounting over the final buckets.
  void finish_outboxes(Worker& worker, const GnnLayer& consumed_by, bool is_predict,
                       StepMetrics& cell) {
    if (is_predict) return;
    const bool combine = config_.partial_gather &&
                         consumed_by.signature.aggregate_is_size_reducing;
    for (std::vector<Message>& bucket : worker.outbox) {
      if (combine) {
        const std::size_t before = bucket.size();
        bucket = combine_outbox(std::move(bucket), consumed_by.signature.aggregate_kind);
        cell.combiner_savings += before - bucket.size();
      }
      for (const Message& m : bucket) {
        ++cell.msgs_out;
        cell.bytes_out += wire_bytes(m);
      }
    }
  }

  // Merge every dense message in a bucket sharing a destination into one
  // partial; references pass through untouched. The source id of a partial
  // is the smallest source merged into it.
  static std::vector<Message> combine_outbox(std::vector<Message> bucket,
                                             AggregateKind kind) {
    std::map<NodeId, Message> combined;  // dst -> partial under construction
    std::vector<Message> passthrough;
    for (Message& m : bucket) {
      if (m.is_broadcast_ref()) {
        passthrough.push_back(std::move(m));
        continue;
      }
      auto it = combined.find(m.dst);
      if (it == combined.end()) {
        Message partial{m.dst, m.src, AggregateState::empty(kind)};
        it = combined.emplace(m.dst, std::move(partial)).first;
      }
      AggregateState& agg = std::get<AggregateState>(it->second.payload);
      if (m.is_dense()) {
        agg.add_message(m.src, std::get<DenseVector>(m.payload));
      } else {
        agg = aggregate_merge(std::move(agg), std::get<AggregateState>(m.payload));
      }
      it->second.src = std::min(it->second.src, m.src);
    }
    std::vector<Message> out;
    out.reserve(combined.size() + passthrough.size());
    for (auto& [dst, m] : combined) out.push_back(std::move(m));
    for (Message& m : passthrough) out.push_back(std::move(m));
    return out;
  }

  // Barrier: the inbox of step t+1 contains exactly the messages sent in
  // step t, appended in sender-worker order; registries hold this step's
  // broadcast payloads and nothing older.
  void deliver(std::uint32_t step, RunMetrics& metrics) {
    const std::uint32_t num_steps = model_.depth() + 1;
    for (Worker& w : workers_) {
      w.inbox.clear();
      w.registry.clear();
    }
    if (step + 1 >= num_steps) return;

    for (std::uint32_t rw = 0; rw < num_workers_; ++rw) {
      Worker& receiver = workers_[rw];
      StepMetrics& cell = metrics.at(rw, step + 1);
      for (std::uint32_t sw = 0; sw < num_workers_; ++sw) {
        for (Message& m : workers_[sw].outbox[rw]) {
          if (!receiver.part.nodes.count(m.dst)) {
            throw std::logic_error("pregel: message routed to unknown node " +
                                   to_string(m.dst));
          }
          ++cell.msgs_in;
          cell.bytes_in += wire_bytes(m);
          receiver.inbox[m.dst].push_back(InboxMessage{std::move(m), sw});
        }
      }
    }
    for (std::uint32_t sw = 0; sw < num_workers_; ++sw) {
      for (auto& [dw, entry] : workers_[sw].publications) {
        StepMetrics& cell = metrics.at(dw, step + 1);
        cell.bytes_in += broadcast_entry_wire_bytes(entry.second);
        workers_[dw].registry.publish(entry.first, std::move(entry.second));
      }
      workers_[sw].publications.clear();
      for (auto& bucket : workers_[sw].outbox) bucket.clear();
    }
  }

  const GraphTables& tables_;
  const ModelBundle& model_;
  std::uint32_t num_workers_;
  StrategyConfig config_;
  std::uint64_t threshold_;
  PregelOptions options_;
  std::vector<Worker> workers_;
};

// Load-balance preprocessing plus the superstep loop. The hub threshold is
// computed from the original edge count before any shadow rewrite.
inline InferenceResult run_pregel_inference(const GraphTables& tables,
                                            const ModelBundle& model,
                                            std::uint32_t num_workers,
                                            const StrategyConfig& config = {},
                                            const PregelOptions& options = {}) {
  const std::uint64_t threshold =
      resolve_threshold(config, tables.num_edges, num_workers);
  if (config.shadow_nodes) {
    const ShadowResult shadow =
        plan_shadow_nodes(tables, threshold, compute_degree_stats(tables));
    PregelEngine engine(shadow.tables, model, num_workers, config, threshold, options);
    return engine.run();
  }
  PregelEngine engine(tables, model, num_workers, config, threshold, options);
  return engine.run();
}

}  // namespace ginfer

#endif  // GINFER_PREGEL_HPP
