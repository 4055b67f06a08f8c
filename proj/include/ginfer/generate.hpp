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

#ifndef GINFER_GENERATE_HPP
#define GINFER_GENERATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/rng.hpp"

namespace ginfer {

enum class SkewMode : std::uint8_t { kIn, kOut, kBoth };

inline const char* to_string(SkewMode m) {
  switch (m) {
    case SkewMode::kIn: return "in";
    case SkewMode::kOut: return "out";
    case SkewMode::kBoth: return "both";
  }
  return "?";
}

struct PowerLawConfig {
  std::uint64_t num_nodes = 0;
  std::uint64_t target_edges = 0;
  double exponent = 2.1;
  SkewMode skew = SkewMode::kIn;
  std::uint32_t feature_dim = 8;
  std::uint32_t num_classes = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_nodes < 2) throw std::invalid_argument("generator: num_nodes must be >= 2");
    if (exponent <= 1.0) throw std::invalid_argument("generator: exponent must be > 1");
    if (feature_dim == 0) throw std::invalid_argument("generator: feature_dim must be > 0");
    // Simple digraph without self-loops: at most n*(n-1) edges.
    const long double cap = static_cast<long double>(num_nodes) *
                            static_cast<long double>(num_nodes - 1);
    if (static_cast<long double>(target_edges) > cap) {
      throw std::invalid_argument("generator: infeasible degree sequence, too many edges");
    }
  }
};

struct GeneratedGraph {
  GraphTables tables;
  std::map<NodeId, std::uint32_t> labels;
};

namespace detail {

// Inverse-CDF sampler for the discrete power law P(d) ~ d^(-alpha),
// d in [1, max_degree].
class PowerLawDegreeSampler {
 public:
  PowerLawDegreeSampler(std::uint64_t max_degree, double alpha) {
    cumulative_.reserve(max_degree);
    double total = 0.0;
    for (std::uint64_t d = 1; d <= max_degree; ++d) {
      total += std::pow(static_cast<double>(d), -alpha);
      cumulative_.push_back(total);
    }
    for (double& c : cumulative_) c /= total;
    cumulative_.back() = 1.0;
  }

  std::uint64_t sample(SplitMix64& rng) const {
    const double u = rng.next_double();
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::uint64_t>(it - cumulative_.begin()) + 1;
  }

 private:
  std::vector<double> cumulative_;
};

// Scale raw degree draws so they sum to `target` exactly while preserving
// proportions (largest-remainder rounding), then clamp each entry to
// `max_per_node`, spilling any excess onto unclamped entries.
inline std::vector<std::uint64_t> scale_degrees(const std::vector<std::uint64_t>& raw,
                                                std::uint64_t target,
                                                std::uint64_t max_per_node) {
  std::vector<std::uint64_t> deg(raw.size(), 0);
  if (target == 0) return deg;
  unsigned __int128 total = 0;
  for (std::uint64_t r : raw) total += r;

  std::vector<std::pair<unsigned __int128, std::size_t>> remainders;
  remainders.reserve(raw.size());
  unsigned __int128 assigned = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const unsigned __int128 num = static_cast<unsigned __int128>(raw[i]) * target;
    deg[i] = static_cast<std::uint64_t>(num / total);
    assigned += deg[i];
    remainders.emplace_back(num % total, i);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::uint64_t leftover = target - static_cast<std::uint64_t>(assigned);
  for (std::size_t i = 0; i < remainders.size() && leftover > 0; ++i, --leftover) {
    ++deg[remainders[i].second];
  }

  std::uint64_t excess = 0;
  for (std::uint64_t& d : deg) {
    if (d > max_per_node) {
      excess += d - max_per_node;
      d = max_per_node;
    }
  }
  for (std::size_t i = 0; i < deg.size() && excess > 0; ++i) {
    const std::uint64_t room = max_per_node - deg[i];
    const std::uint64_t take = std::min(room, excess);
    deg[i] += take;
    excess -= take;
  }
  if (excess > 0) throw std::invalid_argument("generator: infeasible degree sequence");
  return deg;
}

// Sample `k` distinct values from {0..n-1} \ {self}. The caller-provided
// pool must be the identity permutation of size n; it is restored before
// returning, which keeps the whole pass O(sum of k).
inline void sample_distinct(std::vector<std::uint64_t>& pool, std::uint64_t n,
                            std::uint64_t self, std::uint64_t k, SplitMix64& rng,
                            std::vector<std::uint64_t>& out) {
  out.clear();
  std::vector<std::pair<std::size_t, std::size_t>> undo;
  std::swap(pool[self], pool[n - 1]);
  undo.emplace_back(self, n - 1);
  std::uint64_t avail = n - 1;
  for (std::uint64_t t = 0; t < k; ++t) {
    const std::uint64_t j = rng.next_below(avail - t);
    out.push_back(pool[j]);
    std::swap(pool[j], pool[avail - 1 - t]);
    undo.emplace_back(j, avail - 1 - t);
  }
  for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
    std::swap(pool[it->first], pool[it->second]);
  }
}

// Walker alias table for O(1) weighted sampling.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    prob_.resize(n);
    alias_.resize(n);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t l : large) prob_[l] = 1.0;
    for (std::size_t s : small) prob_[s] = 1.0;
  }

  std::size_t sample(SplitMix64& rng) const {
    const std::size_t i = static_cast<std::size_t>(rng.next_below(prob_.size()));
    return rng.next_double() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace detail

// Synthesize a directed graph whose skewed side follows the discrete power
// law P(d) ~ d^(-exponent). The scaled degree sequence sums to target_edges
// exactly; the opposite endpoints are uniform (kIn/kOut) or weighted by node
// rank (kBoth, so both sides come out skewed). Features in [-1, 1) and class
// labels are drawn from independent streams of the same seed, so identical
// parameters reproduce byte-identical tables.
inline GeneratedGraph generate_power_law(const PowerLawConfig& cfg) {
  cfg.validate();
  const std::uint64_t n = cfg.num_nodes;
  SplitMix64 base(cfg.seed);
  SplitMix64 degree_rng = base.fork(1);
  SplitMix64 endpoint_rng = base.fork(2);
  SplitMix64 feature_rng = base.fork(3);
  SplitMix64 label_rng = base.fork(4);

  GeneratedGraph result;
  GraphTables& g = result.tables;
  g.feature_dim = cfg.feature_dim;
  g.edge_feature_dim = 0;

  for (std::uint64_t i = 0; i < n; ++i) {
    NodeRecord rec;
    rec.id = NodeId{i, std::nullopt};
    rec.features.resize(cfg.feature_dim);
    for (float& f : rec.features) f = feature_rng.next_symmetric(1.0f);
    result.labels[rec.id] = static_cast<std::uint32_t>(label_rng.next_below(cfg.num_classes));
    g.nodes.emplace(rec.id, std::move(rec));
  }

  std::vector<std::uint64_t> degrees(n, 0);
  if (cfg.target_edges > 0) {
    detail::PowerLawDegreeSampler sampler(n - 1, cfg.exponent);
    std::vector<std::uint64_t> raw(n);
    for (std::uint64_t i = 0; i < n; ++i) raw[i] = sampler.sample(degree_rng);
    degrees = detail::scale_degrees(raw, cfg.target_edges, n - 1);
  }

  // adjacency[i] = sorted destinations of node i
  std::vector<std::vector<std::uint64_t>> adjacency(n);
  if (cfg.target_edges > 0) {
    if (cfg.skew == SkewMode::kIn || cfg.skew == SkewMode::kOut) {
      std::vector<std::uint64_t> pool(n);
      std::iota(pool.begin(), pool.end(), 0);
      std::vector<std::uint64_t> picked;
      for (std::uint64_t i = 0; i < n; ++i) {
        detail::sample_distinct(pool, n, i, degrees[i], endpoint_rng, picked);
        if (cfg.skew == SkewMode::kOut) {
          adjacency[i] = picked;  // i keeps the skewed out-degree
        } else {
          for (std::uint64_t src : picked) adjacency[src].push_back(i);
        }
      }
    } else {
      // kBoth: power-law out-degrees, destinations weighted by rank so the
      // in-degree side is skewed as well.
      std::vector<double> weights(n);
      for (std::uint64_t j = 0; j < n; ++j)
        weights[j] = std::pow(static_cast<double>(j + 1), -cfg.exponent);
      detail::AliasTable alias(weights);
      std::unordered_set<std::uint64_t> used;
      for (std::uint64_t i = 0; i < n; ++i) {
        used.clear();
        for (std::uint64_t t = 0; t < degrees[i]; ++t) {
          std::uint64_t dst = 0;
          bool found = false;
          for (int attempt = 0; attempt < 64; ++attempt) {
            dst = alias.sample(endpoint_rng);
            if (dst != i && !used.count(dst)) {
              found = true;
              break;
            }
          }
          if (!found) {
            // Deterministic fallback: walk forward to the next free slot.
            do {
              dst = (dst + 1) % n;
            } while (dst == i || used.count(dst));
          }
          used.insert(dst);
          adjacency[i].push_back(dst);
        }
      }
    }
  }

  for (std::uint64_t i = 0; i < n; ++i) {
    std::sort(adjacency[i].begin(), adjacency[i].end());
    NodeRecord& rec = g.nodes.at(NodeId{i, std::nullopt});
    rec.out_nbrs.reserve(adjacency[i].size());
    for (std::uint64_t dst : adjacency[i]) {
      rec.out_nbrs.push_back(OutEdge{NodeId{dst, std::nullopt}, {}});
    }
    rec.logical_out_degree = rec.out_nbrs.size();
    g.num_edges += rec.out_nbrs.size();
  }
  return result;
}

inline void write_labels(const GeneratedGraph& gen, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [id, label] : gen.labels) {
    out << to_string(id) << '\t' << label << '\n';
  }
}

// Write nodes.tsv / edges.tsv / labels.tsv into a directory.
inline void write_generated_graph(const GeneratedGraph& gen,
                                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_node_table(gen.tables, dir / "nodes.tsv");
  write_edge_table(gen.tables, dir / "edges.tsv");
  write_labels(gen, dir / "labels.tsv");
}

}  // namespace ginfer

#endif  // GINFER_GENERATE_HPP
