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

#ifndef GINFER_MAPREDUCE_HPP
#define GINFER_MAPREDUCE_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/message.hpp"
#include "ginfer/metrics.hpp"
#include "ginfer/model.hpp"
#include "ginfer/output_io.hpp"
#include "ginfer/pregel.hpp"  // InferenceResult
#include "ginfer/strategy.hpp"
#include "ginfer/wire.hpp"

namespace ginfer {

// Record kinds in shuffle order: a reducer must see a key's state before its
// in-edge messages. OUT_EDGE_INFO is reserved for layers whose receivers
// consume in-edge features; the built-in layers carry adjacency inside
// SELF_STATE instead.
enum class RecordKind : std::uint8_t { kSelfState = 0, kInEdgeMsg = 1, kOutEdgeInfo = 2 };

enum class InEdgePayloadKind : std::uint8_t { kDense = 0, kPartial = 1, kBroadcastRef = 2 };

struct KeyedRecord {
  NodeId key;
  RecordKind kind = RecordKind::kSelfState;
  NodeId src;  // sort component; equals key for SELF_STATE records
  wire::Buffer payload;

  std::uint64_t wire_size() const { return 15 + payload.size(); }

  friend bool operator<(const KeyedRecord& a, const KeyedRecord& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.src < b.src;
  }
};

// Everything a node needs between rounds; re-emitted every round because the
// backend keeps nothing resident.
struct SelfState {
  DenseVector embedding;
  std::vector<OutEdge> out_nbrs;
  std::uint64_t logical_out_degree = 0;
  bool has_self_loop = false;
};

namespace detail {

inline KeyedRecord make_self_record(const NodeId& id, const SelfState& s) {
  KeyedRecord rec;
  rec.key = id;
  rec.kind = RecordKind::kSelfState;
  rec.src = id;
  wire::put_vector(rec.payload, s.embedding);
  wire::put_u32(rec.payload, static_cast<std::uint32_t>(s.out_nbrs.size()));
  for (const OutEdge& e : s.out_nbrs) {
    wire::put_node_id(rec.payload, e.dst);
    wire::put_vector(rec.payload, e.features);
  }
  wire::put_u64(rec.payload, s.logical_out_degree);
  wire::put_u8(rec.payload, s.has_self_loop ? 1 : 0);
  return rec;
}

inline SelfState parse_self_record(const KeyedRecord& rec) {
  wire::Reader r(rec.payload);
  SelfState s;
  s.embedding = r.get_vector();
  const std::uint32_t n = r.get_u32();
  s.out_nbrs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    OutEdge e;
    e.dst = r.get_node_id();
    e.features = r.get_vector();
    s.out_nbrs.push_back(std::move(e));
  }
  s.logical_out_degree = r.get_u64();
  s.has_self_loop = r.get_u8() != 0;
  if (!r.done()) throw std::runtime_error("mapreduce: trailing bytes in self record");
  return s;
}

inline KeyedRecord make_dense_record(const NodeId& dst, const NodeId& src,
                                     const DenseVector& payload) {
  KeyedRecord rec;
  rec.key = dst;
  rec.kind = RecordKind::kInEdgeMsg;
  rec.src = src;
  wire::put_node_id(rec.payload, src);
  wire::put_u8(rec.payload, static_cast<std::uint8_t>(InEdgePayloadKind::kDense));
  wire::put_vector(rec.payload, payload);
  return rec;
}

inline KeyedRecord make_partial_record(const NodeId& dst, const NodeId& src,
                                       const AggregateState& agg) {
  KeyedRecord rec;
  rec.key = dst;
  rec.kind = RecordKind::kInEdgeMsg;
  rec.src = src;
  wire::put_node_id(rec.payload, src);
  wire::put_u8(rec.payload, static_cast<std::uint8_t>(InEdgePayloadKind::kPartial));
  wire::put_aggregate(rec.payload, agg);
  return rec;
}

inline KeyedRecord make_ref_record(const NodeId& dst, const NodeId& src) {
  KeyedRecord rec;
  rec.key = dst;
  rec.kind = RecordKind::kInEdgeMsg;
  rec.src = src;
  wire::put_node_id(rec.payload, src);
  wire::put_u8(rec.payload, static_cast<std::uint8_t>(InEdgePayloadKind::kBroadcastRef));
  return rec;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// External sort-merge shuffle

// Collects keyed records under a memory budget, spilling sorted runs to disk
// when it fills, and serves them back grouped by key in ascending (key,
// kind, src) order. An optional combiner folds dense/partial in-edge
// messages per key within each run before it is written (map-side
// partial-gather), so a key sees at most one partial per run.
class Shuffle {
 public:
  // budget_bytes == 0 means unlimited (single in-memory sort).
  Shuffle(std::uint64_t budget_bytes, std::filesystem::path spill_dir, std::string tag,
          std::optional<AggregateKind> combine_kind = std::nullopt)
      : budget_(budget_bytes),
        spill_dir_(std::move(spill_dir)),
        tag_(std::move(tag)),
        combine_kind_(combine_kind) {}

  void add(KeyedRecord rec) {
    buffered_bytes_ += rec.wire_size() + kRecordOverhead;
    buffer_.push_back(std::move(rec));
    if (budget_ != 0 && buffered_bytes_ >= budget_) spill();
  }

  std::size_t run_count() const { return run_paths_.size() + (buffer_.empty() ? 0 : 1); }

  // Grouped iteration; call once.
  class GroupedStream {
   public:
    struct Group {
      NodeId key;
      std::vector<KeyedRecord> records;
    };

    std::optional<Group> next() {
      if (heap_.empty()) return std::nullopt;
      Group group;
      group.key = heap_.top().record.key;
      while (!heap_.empty() && heap_.top().record.key == group.key) {
        HeapItem item = heap_.top();
        heap_.pop();
        group.records.push_back(std::move(item.record));
        advance(item.source);
      }
      return group;
    }

   private:
    friend class Shuffle;

    struct HeapItem {
      KeyedRecord record;
      std::size_t source;
      bool operator>(const HeapItem& other) const {
        if (record < other.record) return false;
        if (other.record < record) return true;
        return source > other.source;  // tie-break by run index
      }
    };

    struct RunReader {
      std::ifstream file;
      std::vector<KeyedRecord>* memory = nullptr;
      std::size_t memory_pos = 0;

      std::optional<KeyedRecord> next() {
        if (memory) {
          if (memory_pos >= memory->size()) return std::nullopt;
          return std::move((*memory)[memory_pos++]);
        }
        return read_record(file);
      }
    };

    void advance(std::size_t source) {
      auto rec = readers_[source].next();
      if (rec) heap_.push(HeapItem{std::move(*rec), source});
    }

    std::vector<RunReader> readers_;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap_;
  };

  GroupedStream finish() {
    if (!buffer_.empty()) {
      prepare_buffer();
    }
    GroupedStream stream;
    stream.readers_.resize(run_paths_.size() + (buffer_.empty() ? 0 : 1));
    for (std::size_t i = 0; i < run_paths_.size(); ++i) {
      stream.readers_[i].file.open(run_paths_[i], std::ios::binary);
      if (!stream.readers_[i].file) {
        throw std::runtime_error("shuffle: cannot reopen run file " +
                                 run_paths_[i].string());
      }
    }
    if (!buffer_.empty()) {
      stream.readers_.back().memory = &buffer_;
    }
    for (std::size_t i = 0; i < stream.readers_.size(); ++i) stream.advance(i);
    return stream;
  }

  ~Shuffle() {
    for (const auto& path : run_paths_) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  }

  static void write_record(std::ofstream& out, const KeyedRecord& rec) {
    wire::Buffer header;
    wire::put_node_id(header, rec.key);
    wire::put_u8(header, static_cast<std::uint8_t>(rec.kind));
    wire::put_u32(header, static_cast<std::uint32_t>(rec.payload.size()));
    out.write(reinterpret_cast<const char*>(header.data()),
              static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(rec.payload.data()),
              static_cast<std::streamsize>(rec.payload.size()));
  }

  static std::optional<KeyedRecord> read_record(std::ifstream& in) {
    std::uint8_t header[15];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() == 0 && in.eof()) return std::nullopt;
    if (in.gcount() != sizeof(header)) {
      throw std::runtime_error("shuffle: corrupt run file (truncated header)");
    }
    wire::Reader r(header, sizeof(header));
    KeyedRecord rec;
    rec.key = r.get_node_id();
    rec.kind = static_cast<RecordKind>(r.get_u8());
    const std::uint32_t len = r.get_u32();
    rec.payload.resize(len);
    in.read(reinterpret_cast<char*>(rec.payload.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw std::runtime_error("shuffle: corrupt run file (truncated payload)");
    }
    if (rec.kind == RecordKind::kInEdgeMsg) {
      wire::Reader pr(rec.payload);
      rec.src = pr.get_node_id();
    } else {
      rec.src = rec.key;
    }
    return rec;
  }

 private:
  static constexpr std::uint64_t kRecordOverhead = 48;  // struct + vector slack

  // Sort the buffer and run the combiner; shared by spill() and the final
  // in-memory run.
  void prepare_buffer() {
    std::sort(buffer_.begin(), buffer_.end());
    if (combine_kind_) combine_buffer();
  }

  void combine_buffer() {
    std::vector<KeyedRecord> out;
    out.reserve(buffer_.size());
    std::size_t i = 0;
    while (i < buffer_.size()) {
      const NodeId group_key = buffer_[i].key;
      std::size_t j = i;
      while (j < buffer_.size() && buffer_[j].key == group_key) ++j;
      AggregateState agg = AggregateState::empty(*combine_kind_);
      NodeId partial_src;
      bool have_partial = false;
      std::vector<KeyedRecord> passthrough;
      for (std::size_t k = i; k < j; ++k) {
        KeyedRecord& rec = buffer_[k];
        if (rec.kind != RecordKind::kInEdgeMsg) {
          passthrough.push_back(std::move(rec));
          continue;
        }
        wire::Reader r(rec.payload);
        const NodeId src = r.get_node_id();
        const auto payload_kind = static_cast<InEdgePayloadKind>(r.get_u8());
        switch (payload_kind) {
          case InEdgePayloadKind::kDense:
            agg.add_message(src, r.get_vector());
            break;
          case InEdgePayloadKind::kPartial:
            agg = aggregate_merge(std::move(agg), wire::get_aggregate(r));
            break;
          case InEdgePayloadKind::kBroadcastRef:
            passthrough.push_back(std::move(rec));
            continue;
        }
        if (!have_partial) {
          partial_src = src;
          have_partial = true;
        }
        combined_away_ += 1;
      }
      if (have_partial) {
        combined_away_ -= 1;  // one partial replaces the folded messages
        passthrough.push_back(detail::make_partial_record(group_key, partial_src, agg));
      }
      std::sort(passthrough.begin(), passthrough.end());
      for (KeyedRecord& rec : passthrough) out.push_back(std::move(rec));
      i = j;
    }
    buffer_ = std::move(out);
  }

  void spill() {
    prepare_buffer();
    std::filesystem::create_directories(spill_dir_);
    const auto path =
        spill_dir_ / (tag_ + "_run" + std::to_string(run_paths_.size()) + ".bin");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("shuffle: cannot create run file " + path.string());
    for (const KeyedRecord& rec : buffer_) write_record(out, rec);
    out.flush();
    if (!out) throw std::runtime_error("shuffle: failed writing run file " + path.string());
    run_paths_.push_back(path);
    buffer_.clear();
    buffered_bytes_ = 0;
  }

 public:
  // Messages merged away by the run-local combiner.
  std::uint64_t combiner_savings() const { return combined_away_; }

 private:
  std::uint64_t budget_;
  std::filesystem::path spill_dir_;
  std::string tag_;
  std::optional<AggregateKind> combine_kind_;
  std::vector<KeyedRecord> buffer_;
  std::uint64_t buffered_bytes_ = 0;
  std::vector<std::filesystem::path> run_paths_;
  std::uint64_t combined_away_ = 0;
};

// ---------------------------------------------------------------------------
// Round-based engine

struct MrOptions {
  std::uint64_t memory_budget_bytes = 0;  // 0 = unlimited
  std::filesystem::path spill_dir;        // default: system temp
  bool capture_final_states = false;
};

namespace detail {

struct MrShuffleSet {
  std::vector<std::unique_ptr<Shuffle>> per_reducer;
  std::vector<std::map<NodeId, DenseVector>> registries;

  Shuffle& shuffle_for(const NodeId& key, std::uint32_t num_reducers) {
    return *per_reducer[partition_of(key, num_reducers)];
  }
};

inline MrShuffleSet make_shuffle_set(std::uint32_t num_reducers, std::uint64_t budget,
                                     const std::filesystem::path& dir, std::uint32_t round,
                                     std::optional<AggregateKind> combine_kind) {
  MrShuffleSet set;
  set.registries.resize(num_reducers);
  for (std::uint32_t r = 0; r < num_reducers; ++r) {
    set.per_reducer.push_back(std::make_unique<Shuffle>(
        budget, dir, "round" + std::to_string(round) + "_r" + std::to_string(r),
        combine_kind));
  }
  return set;
}

// Emit a node's round output: its next self state plus one message per
// out-edge (or a broadcast encoding for hubs).
inline void mr_scatter(const NodeId& id, const SelfState& self, const DenseVector& h,
                       const GnnLayer& next_layer, const StrategyConfig& config,
                       std::uint64_t threshold, std::uint32_t num_reducers,
                       MrShuffleSet& next, StepMetrics& cell) {
  SelfState forwarded = self;
  forwarded.embedding = h;
  KeyedRecord self_rec = make_self_record(id, forwarded);
  ++cell.msgs_out;
  cell.bytes_out += self_rec.wire_size();
  next.shuffle_for(id, num_reducers).add(std::move(self_rec));

  if (self.out_nbrs.empty()) return;
  const NodeContext ctx{self.logical_out_degree, self.has_self_loop};
  const NodeState state{h, 0};
  const bool skip_self = next_layer.algorithm == GnnAlgorithm::kGat;
  const bool uniform = next_layer.signature.message_uniform_over_out_edges;
  const bool use_broadcast =
      config.broadcast && uniform && self.out_nbrs.size() > threshold;

  DenseVector shared_payload;
  if (uniform) {
    shared_payload = apply_edge(next_layer, state, ctx, self.out_nbrs.front());
  }

  if (use_broadcast) {
    std::set<std::uint32_t> dest_reducers;
    for (const OutEdge& e : self.out_nbrs) {
      if (skip_self && e.dst.raw == id.raw) continue;
      dest_reducers.insert(partition_of(e.dst, num_reducers));
      KeyedRecord ref = make_ref_record(e.dst, id);
      ++cell.msgs_out;
      cell.bytes_out += ref.wire_size();
      next.shuffle_for(e.dst, num_reducers).add(std::move(ref));
    }
    for (std::uint32_t dr : dest_reducers) {
      next.registries[dr].emplace(id, shared_payload);
      ++cell.bcast_payloads_out;
      cell.bytes_out += broadcast_entry_wire_bytes(shared_payload);
    }
    return;
  }

  for (const OutEdge& e : self.out_nbrs) {
    if (skip_self && e.dst.raw == id.raw) continue;
    const DenseVector payload =
        uniform ? shared_payload : apply_edge(next_layer, state, ctx, e);
    KeyedRecord rec = make_dense_record(e.dst, id, payload);
    ++cell.msgs_out;
    cell.bytes_out += rec.wire_size();
    next.shuffle_for(e.dst, num_reducers).add(std::move(rec));
  }
}

}  // namespace detail

// External-memory inference: one map round that turns raw tables into
// initial embeddings and messages, then K sort-shuffle-reduce rounds, one
// GNN layer each. Reducer r owns keys with partition_of(key, R) == r. All
// inter-round state travels in records, so peak memory tracks the largest
// single key group rather than the partition.
inline InferenceResult run_mr_inference(const GraphTables& input_tables,
                                        const ModelBundle& model,
                                        std::uint32_t num_reducers,
                                        const StrategyConfig& config = {},
                                        const MrOptions& options = {}) {
  if (num_reducers == 0) throw std::invalid_argument("mapreduce: reducers must be >= 1");
  model.validate();
  if (input_tables.feature_dim != model.feature_dim) {
    throw std::invalid_argument("mapreduce: graph feature dim != model feature dim");
  }
  const std::uint32_t k_layers = model.depth();
  const std::uint64_t threshold =
      resolve_threshold(config, input_tables.num_edges, num_reducers);

  std::optional<ShadowResult> shadow;
  const GraphTables* tables = &input_tables;
  if (config.shadow_nodes) {
    shadow = plan_shadow_nodes(input_tables, threshold,
                               compute_degree_stats(input_tables));
    tables = &shadow->tables;
  }

  std::filesystem::path spill_dir = options.spill_dir;
  if (spill_dir.empty()) {
    spill_dir = std::filesystem::temp_directory_path() /
                ("ginfer_mr_" + std::to_string(
                                    std::chrono::steady_clock::now().time_since_epoch().count()));
  }
  std::filesystem::create_directories(spill_dir);

  auto combine_kind_for = [&](const GnnLayer& layer) -> std::optional<AggregateKind> {
    if (config.partial_gather && layer.signature.aggregate_is_size_reducing) {
      return layer.signature.aggregate_kind;
    }
    return std::nullopt;
  };

  InferenceResult result;
  result.metrics = RunMetrics::make(num_reducers, k_layers + 1);

  // Map: initialization round. Map task r covers the nodes of partition r.
  auto shuffles = detail::make_shuffle_set(num_reducers, options.memory_budget_bytes,
                                           spill_dir, 1, combine_kind_for(model.layers[0]));
  {
    auto parts = build_partitions(*tables, num_reducers);
    for (std::uint32_t r = 0; r < num_reducers; ++r) {
      const auto start = std::chrono::steady_clock::now();
      StepMetrics& cell = result.metrics.at(r, 0);
      for (const auto& [id, rec] : parts[r].nodes) {
        SelfState self;
        self.embedding = init_embedding(model.layers[0], rec).embedding;
        self.out_nbrs = rec.out_nbrs;
        self.logical_out_degree = rec.logical_out_degree;
        self.has_self_loop = rec.has_self_loop;
        detail::mr_scatter(id, self, self.embedding, model.layers[0], config, threshold,
                           num_reducers, shuffles, cell);
      }
      cell.wall_ms += std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    }
  }

  std::set<std::uint64_t> physical_ids;
  for (const auto& [id, rec] : tables->nodes) physical_ids.insert(id.raw);

  // Reduce rounds, one layer each.
  for (std::uint32_t round = 1; round <= k_layers; ++round) {
    const GnnLayer& layer = model.layers[round - 1];
    const bool is_last = round == k_layers;
    detail::MrShuffleSet next;
    if (!is_last) {
      next = detail::make_shuffle_set(num_reducers, options.memory_budget_bytes, spill_dir,
                                      round + 1, combine_kind_for(model.layers[round]));
    }

    for (std::uint32_t r = 0; r < num_reducers; ++r) {
      const auto start = std::chrono::steady_clock::now();
      StepMetrics& cell = result.metrics.at(r, round);

      BroadcastRegistry registry;
      for (auto& [src, payload] : shuffles.registries[r]) {
        cell.bytes_in += broadcast_entry_wire_bytes(payload);
        registry.publish(src, std::move(payload));
      }

      auto stream = shuffles.per_reducer[r]->finish();
      // finish() ran the combiner over the last buffered run too.
      cell.combiner_savings += shuffles.per_reducer[r]->combiner_savings();
      while (auto group = stream.next()) {
        if (partition_of(group->key, num_reducers) != r) {
          throw std::logic_error("mapreduce: key routed to the wrong reducer");
        }
        if (group->records.empty() || group->records.front().kind != RecordKind::kSelfState) {
          throw std::runtime_error("mapreduce: group for " + to_string(group->key) +
                                   " is missing its self state");
        }
        if (group->records.size() > 1 &&
            group->records[1].kind == RecordKind::kSelfState) {
          throw std::runtime_error("mapreduce: duplicate self state for " +
                                   to_string(group->key));
        }
        const SelfState self = detail::parse_self_record(group->records.front());

        AggregateState agg = AggregateState::empty(layer.signature.aggregate_kind);
        std::uint64_t in_msgs = 0;
        for (std::size_t i = 0; i < group->records.size(); ++i) {
          const KeyedRecord& rec = group->records[i];
          ++cell.msgs_in;
          cell.bytes_in += rec.wire_size();
          if (rec.kind != RecordKind::kInEdgeMsg) continue;
          ++in_msgs;
          wire::Reader pr(rec.payload);
          const NodeId src = pr.get_node_id();
          const auto payload_kind = static_cast<InEdgePayloadKind>(pr.get_u8());
          switch (payload_kind) {
            case InEdgePayloadKind::kDense:
              agg.add_message(src, pr.get_vector());
              break;
            case InEdgePayloadKind::kPartial:
              agg = aggregate_merge(std::move(agg), wire::get_aggregate(pr));
              break;
            case InEdgePayloadKind::kBroadcastRef:
              agg.add_message(src, registry.resolve(src));
              break;
          }
        }
        cell.max_node_msgs_in = std::max(cell.max_node_msgs_in, in_msgs);

        const NodeContext ctx{self.logical_out_degree, self.has_self_loop};
        const NodeState updated = apply_node(layer, NodeState{self.embedding, round - 1},
                                             agg, ctx, is_last);

        if (!is_last) {
          detail::mr_scatter(group->key, self, updated.embedding, model.layers[round],
                             config, threshold, num_reducers, next, cell);
        } else {
          if (options.capture_final_states) {
            result.final_states.emplace(group->key, updated.embedding);
          }
          if (!group->key.is_mirror() || *group->key.mirror_group == 0) {
            const Prediction p = predict(model.head, updated);
            result.outputs.push_back(
                OutputRow{group->key.physical(), p.predicted_class, p.logits});
          }
        }
      }
      cell.wall_ms += std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    }
    shuffles = std::move(next);
  }

  std::error_code ec;
  std::filesystem::remove_all(spill_dir, ec);

  std::sort(result.outputs.begin(), result.outputs.end(),
            [](const OutputRow& a, const OutputRow& b) { return a.id < b.id; });
  for (std::size_t i = 0; i + 1 < result.outputs.size(); ++i) {
    if (result.outputs[i].id == result.outputs[i + 1].id) {
      throw std::logic_error("mapreduce: duplicate output row for " +
                             to_string(result.outputs[i].id));
    }
  }
  if (result.outputs.size() != physical_ids.size()) {
    throw std::logic_error("mapreduce: output rows != physical node count");
  }
  return result;
}

}  // namespace ginfer

#endif  // GINFER_MAPREDUCE_HPP
