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

#ifndef GINFER_METRICS_HPP
#define GINFER_METRICS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ginfer/io_util.hpp"

namespace ginfer {

// Counters for one (worker, step) cell. A "step" is a Pregel superstep or a
// MapReduce round (0 = the init/map step). Reference messages count as
// messages; broadcast payload publications are tracked separately so
// sum(msgs_out at t) == sum(msgs_in at t+1) stays exact.
struct StepMetrics {
  std::uint32_t worker = 0;
  std::uint32_t step = 0;
  std::uint64_t msgs_in = 0;
  std::uint64_t msgs_out = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  double wall_ms = 0.0;
  std::uint64_t combiner_savings = 0;      // messages merged away by combining
  std::uint64_t bcast_payloads_out = 0;    // registry publications
  std::uint64_t max_node_msgs_in = 0;      // largest per-node inbox this step
};

struct RunMetrics {
  std::uint32_t num_workers = 0;
  std::uint32_t num_steps = 0;
  std::vector<StepMetrics> rows;  // one per (worker, step), worker-major

  StepMetrics& at(std::uint32_t worker, std::uint32_t step) {
    return rows[static_cast<std::size_t>(worker) * num_steps + step];
  }
  const StepMetrics& at(std::uint32_t worker, std::uint32_t step) const {
    return rows[static_cast<std::size_t>(worker) * num_steps + step];
  }

  static RunMetrics make(std::uint32_t num_workers, std::uint32_t num_steps) {
    RunMetrics m;
    m.num_workers = num_workers;
    m.num_steps = num_steps;
    m.rows.resize(static_cast<std::size_t>(num_workers) * num_steps);
    for (std::uint32_t w = 0; w < num_workers; ++w) {
      for (std::uint32_t s = 0; s < num_steps; ++s) {
        m.at(w, s).worker = w;
        m.at(w, s).step = s;
      }
    }
    return m;
  }

  std::uint64_t total_msgs_out() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t += r.msgs_out;
    return t;
  }
  std::uint64_t total_msgs_in() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t += r.msgs_in;
    return t;
  }
  std::uint64_t total_bytes_out() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t += r.bytes_out;
    return t;
  }
  std::uint64_t total_bytes_in() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t += r.bytes_in;
    return t;
  }
  std::uint64_t step_msgs_out(std::uint32_t step) const {
    std::uint64_t t = 0;
    for (std::uint32_t w = 0; w < num_workers; ++w) t += at(w, step).msgs_out;
    return t;
  }
  std::uint64_t step_msgs_in(std::uint32_t step) const {
    std::uint64_t t = 0;
    for (std::uint32_t w = 0; w < num_workers; ++w) t += at(w, step).msgs_in;
    return t;
  }
  std::uint64_t max_node_msgs_in_any_step() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t = std::max(t, r.max_node_msgs_in);
    return t;
  }
  std::uint64_t worker_bytes_in(std::uint32_t worker) const {
    std::uint64_t t = 0;
    for (std::uint32_t s = 0; s < num_steps; ++s) t += at(worker, s).bytes_in;
    return t;
  }
  std::uint64_t worker_bytes_out(std::uint32_t worker) const {
    std::uint64_t t = 0;
    for (std::uint32_t s = 0; s < num_steps; ++s) t += at(worker, s).bytes_out;
    return t;
  }

  // Total input bytes of the busiest ceil(W/10) workers; the straggler tail
  // the load-balancing strategies aim at.
  std::uint64_t tail_decile_bytes_in() const {
    if (num_workers == 0) return 0;
    std::vector<std::uint64_t> per_worker(num_workers);
    for (std::uint32_t w = 0; w < num_workers; ++w) per_worker[w] = worker_bytes_in(w);
    std::sort(per_worker.rbegin(), per_worker.rend());
    const std::size_t tail = (num_workers + 9) / 10;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < tail; ++i) total += per_worker[i];
    return total;
  }

  // sum(msgs_out at step t) must equal sum(msgs_in at step t+1).
  bool conserves_messages() const {
    for (std::uint32_t s = 0; s + 1 < num_steps; ++s) {
      if (step_msgs_out(s) != step_msgs_in(s + 1)) return false;
    }
    return num_steps == 0 || step_msgs_out(num_steps - 1) == 0;
  }
};

inline constexpr const char* kMetricsCsvHeader =
    "worker,step,msgs_in,msgs_out,bytes_in,bytes_out,wall_ms,combiner_savings,"
    "bcast_payloads_out,max_node_msgs_in";

// Write one row per (worker, step) to `path`, and totals plus tail-decile
// statistics to `<path>.summary.csv`.
inline void export_metrics(const RunMetrics& metrics, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics file " + path.string());
  out << kMetricsCsvHeader << '\n';
  for (const StepMetrics& r : metrics.rows) {
    out << r.worker << ',' << r.step << ',' << r.msgs_in << ',' << r.msgs_out << ','
        << r.bytes_in << ',' << r.bytes_out << ',' << format_float(static_cast<float>(r.wall_ms))
        << ',' << r.combiner_savings << ',' << r.bcast_payloads_out << ','
        << r.max_node_msgs_in << '\n';
  }

  std::filesystem::path summary_path = path;
  summary_path += ".summary.csv";
  std::ofstream sum(summary_path, std::ios::binary);
  if (!sum) throw std::runtime_error("cannot write metrics summary " + summary_path.string());
  double wall = 0.0;
  std::uint64_t savings = 0, payloads = 0;
  for (const auto& r : metrics.rows) {
    wall += r.wall_ms;
    savings += r.combiner_savings;
    payloads += r.bcast_payloads_out;
  }
  sum << "key,value\n";
  sum << "workers," << metrics.num_workers << '\n';
  sum << "steps," << metrics.num_steps << '\n';
  sum << "total_msgs_in," << metrics.total_msgs_in() << '\n';
  sum << "total_msgs_out," << metrics.total_msgs_out() << '\n';
  sum << "total_bytes_in," << metrics.total_bytes_in() << '\n';
  sum << "total_bytes_out," << metrics.total_bytes_out() << '\n';
  sum << "total_wall_ms," << format_float(static_cast<float>(wall)) << '\n';
  sum << "total_combiner_savings," << savings << '\n';
  sum << "total_bcast_payloads_out," << payloads << '\n';
  sum << "max_node_msgs_in," << metrics.max_node_msgs_in_any_step() << '\n';
  sum << "tail_decile_workers," << (metrics.num_workers + 9) / 10 << '\n';
  sum << "tail_decile_bytes_in," << metrics.tail_decile_bytes_in() << '\n';
}

// Parse a steps CSV produced by export_metrics.
inline RunMetrics load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader) {
    throw std::runtime_error("bad metrics header in " + path.string());
  }
  std::vector<StepMetrics> rows;
  std::uint32_t max_worker = 0, max_step = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_view(line, ',');
    if (fields.size() != 10) throw std::runtime_error("bad metrics row: " + line);
    StepMetrics r;
    r.worker = static_cast<std::uint32_t>(std::stoul(std::string(fields[0])));
    r.step = static_cast<std::uint32_t>(std::stoul(std::string(fields[1])));
    r.msgs_in = std::stoull(std::string(fields[2]));
    r.msgs_out = std::stoull(std::string(fields[3]));
    r.bytes_in = std::stoull(std::string(fields[4]));
    r.bytes_out = std::stoull(std::string(fields[5]));
    r.wall_ms = std::stod(std::string(fields[6]));
    r.combiner_savings = std::stoull(std::string(fields[7]));
    r.bcast_payloads_out = std::stoull(std::string(fields[8]));
    r.max_node_msgs_in = std::stoull(std::string(fields[9]));
    max_worker = std::max(max_worker, r.worker);
    max_step = std::max(max_step, r.step);
    rows.push_back(r);
  }
  RunMetrics m = RunMetrics::make(max_worker + 1, max_step + 1);
  for (const StepMetrics& r : rows) m.at(r.worker, r.step) = r;
  return m;
}

// Statistics of an output comparison or of repeated sampled runs: how far
// two logit tables diverge, and how many distinct classes each node was
// assigned across runs.
struct ComparisonReport {
  double max_abs_diff = 0.0;
  std::uint64_t mismatched_class_count = 0;
  std::map<std::uint32_t, std::uint64_t> nodes_by_class_count;

  std::uint64_t multi_class_nodes() const {
    std::uint64_t total = 0;
    for (const auto& [classes, nodes] : nodes_by_class_count) {
      if (classes >= 2) total += nodes;
    }
    return total;
  }
};

}  // namespace ginfer

#endif  // GINFER_METRICS_HPP
