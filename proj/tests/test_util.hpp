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

#ifndef GINFER_TESTS_TEST_UTIL_HPP
#define GINFER_TESTS_TEST_UTIL_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ginfer/graph.hpp"
#include "ginfer/rng.hpp"

namespace ginfer::testing {

// Small in-memory graph with seeded features; edges given as (src, dst)
// pairs over ids 0..num_nodes-1.
inline GraphTables make_graph(
    std::uint64_t num_nodes,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges,
    std::uint32_t feature_dim = 2, std::uint64_t feature_seed = 17) {
  GraphTables g;
  g.feature_dim = feature_dim;
  SplitMix64 rng(feature_seed);
  for (std::uint64_t i = 0; i < num_nodes; ++i) {
    NodeRecord rec;
    rec.id = NodeId{i, std::nullopt};
    rec.features.resize(feature_dim);
    for (float& f : rec.features) f = rng.next_symmetric(1.0f);
    g.nodes.emplace(rec.id, std::move(rec));
  }
  for (const auto& [src, dst] : edges) {
    NodeRecord& rec = g.nodes.at(NodeId{src, std::nullopt});
    rec.out_nbrs.push_back(OutEdge{NodeId{dst, std::nullopt}, {}});
    if (src == dst) rec.has_self_loop = true;
    ++g.num_edges;
  }
  for (auto& [nid, rec] : g.nodes) {
    std::sort(rec.out_nbrs.begin(), rec.out_nbrs.end(),
              [](const OutEdge& a, const OutEdge& b) { return a.dst < b.dst; });
    rec.logical_out_degree = rec.out_nbrs.size();
  }
  return g;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ginfer_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ginfer::testing

#endif  // GINFER_TESTS_TEST_UTIL_HPP
