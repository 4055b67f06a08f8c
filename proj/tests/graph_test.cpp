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

#include "ginfer/graph.hpp"

#include <string>

#include "ginfer/generate.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace ginfer {
namespace {

using ginfer::testing::TempDir;
using ginfer::testing::write_file;

NodeId id(std::uint64_t raw) { return NodeId{raw, std::nullopt}; }

TEST(IngestTest, TwoNodeGraph) {
  TempDir dir("ingest");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\t2.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n");

  const GraphTables g = ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));
  EXPECT_EQ(g.nodes.size(), 2u);
  EXPECT_EQ(g.num_edges, 1u);
  EXPECT_EQ(g.feature_dim, 1u);
  ASSERT_EQ(g.node(id(1)).out_nbrs.size(), 1u);
  EXPECT_EQ(g.node(id(1)).out_nbrs[0].dst, id(2));
  EXPECT_TRUE(g.node(id(2)).out_nbrs.empty());
}

TEST(IngestTest, ReverseEdges) {
  TempDir dir("ingest_rev");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\t2.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n");

  IngestOptions options;
  options.add_reverse_edges = true;
  const GraphTables g =
      ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"), options);
  EXPECT_EQ(g.num_edges, 2u);
  ASSERT_EQ(g.node(id(2)).out_nbrs.size(), 1u);
  EXPECT_EQ(g.node(id(2)).out_nbrs[0].dst, id(1));
}

TEST(IngestTest, ReverseEdgesDoNotDuplicateSymmetricInput) {
  TempDir dir("ingest_sym");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\t2.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n2\t1\t\n");

  IngestOptions options;
  options.add_reverse_edges = true;
  const GraphTables g =
      ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"), options);
  EXPECT_EQ(g.num_edges, 2u);
}

TEST(IngestTest, FiftyFeatureLineParses) {
  // PPI-style row: 50 node features.
  std::string features;
  for (int i = 0; i < 50; ++i) {
    if (i) features += ',';
    features += "0.5";
  }
  TempDir dir("ingest_ppi");
  write_file(dir.file("nodes.tsv"), "0\t" + features + "\t\n");
  write_file(dir.file("edges.tsv"), "");

  const GraphTables g = ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));
  EXPECT_EQ(g.feature_dim, 50u);
  EXPECT_EQ(g.node(id(0)).features.size(), 50u);
}

TEST(IngestTest, MalformedLineReportsLineNumber) {
  TempDir dir("ingest_bad");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\tnot_a_float\t\n");
  write_file(dir.file("edges.tsv"), "");
  try {
    ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));
    FAIL() << "expected ingest failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(IngestTest, FeatureDimMismatchRejected) {
  TempDir dir("ingest_dim");
  write_file(dir.file("nodes.tsv"), "1\t1.0,2.0\t\n2\t1.0\t\n");
  write_file(dir.file("edges.tsv"), "");
  EXPECT_THROW(ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv")),
               std::runtime_error);
}

TEST(IngestTest, DuplicateEdgeRejected) {
  TempDir dir("ingest_dup");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\t2.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n1\t2\t\n");
  EXPECT_THROW(ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv")),
               std::runtime_error);
}

TEST(IngestTest, SelfLoopNeedsOptIn) {
  TempDir dir("ingest_self");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t1\t\n");
  EXPECT_THROW(ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv")),
               std::runtime_error);

  IngestOptions options;
  options.allow_self_loops = true;
  const GraphTables g =
      ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"), options);
  EXPECT_EQ(g.num_edges, 1u);
  EXPECT_TRUE(g.node(id(1)).has_self_loop);
}

TEST(IngestTest, AddSelfLoopsOncePerNode) {
  TempDir dir("ingest_addself");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t\n2\t2.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n1\t1\t\n");
  IngestOptions options;
  options.add_self_loops = true;
  const GraphTables g =
      ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"), options);
  // (1,1) already present, (2,2) added; no duplicates.
  EXPECT_EQ(g.num_edges, 3u);
  EXPECT_TRUE(g.node(id(1)).has_self_loop);
  EXPECT_TRUE(g.node(id(2)).has_self_loop);
}

TEST(IngestTest, NodeTableNeighborsMaterializeEdges) {
  TempDir dir("ingest_nbrs");
  write_file(dir.file("nodes.tsv"), "1\t1.0\t2,3\n2\t2.0\t\n3\t3.0\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t\n");
  const GraphTables g = ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));
  // The (1,3) pair listed only in the node table becomes an edge too.
  EXPECT_EQ(g.num_edges, 2u);
  ASSERT_EQ(g.node(id(1)).out_nbrs.size(), 2u);
  EXPECT_EQ(g.node(id(1)).out_nbrs[0].dst, id(2));
  EXPECT_EQ(g.node(id(1)).out_nbrs[1].dst, id(3));
}

TEST(IngestTest, WriteReadRoundTrip) {
  TempDir dir("ingest_rt");
  write_file(dir.file("nodes.tsv"), "1\t1.5,-2\t2\n2\t0.25,3\t\n");
  write_file(dir.file("edges.tsv"), "1\t2\t0.5\n");
  const GraphTables g = ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));

  write_node_table(g, dir.file("nodes2.tsv"));
  write_edge_table(g, dir.file("edges2.tsv"));
  const GraphTables g2 = ingest_tables(dir.file("nodes2.tsv"), dir.file("edges2.tsv"));
  EXPECT_EQ(g2.num_edges, g.num_edges);
  EXPECT_EQ(g2.nodes.size(), g.nodes.size());
  EXPECT_EQ(g2.node(id(1)).features, g.node(id(1)).features);
  EXPECT_EQ(g2.node(id(1)).out_nbrs[0].features, g.node(id(1)).out_nbrs[0].features);
}

TEST(DegreeStatsTest, StarGraph) {
  TempDir dir("deg_star");
  write_file(dir.file("nodes.tsv"),
             "0\t0.0\t\n1\t0.0\t\n2\t0.0\t\n3\t0.0\t\n4\t0.0\t\n5\t0.0\t\n");
  write_file(dir.file("edges.tsv"), "0\t1\t\n0\t2\t\n0\t3\t\n0\t4\t\n0\t5\t\n");
  const GraphTables g = ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv"));
  const DegreeStats stats = compute_degree_stats(g);
  EXPECT_EQ(stats.out_degree.at(id(0)), 5u);
  EXPECT_EQ(stats.in_degree.at(id(0)), 0u);
  for (std::uint64_t leaf = 1; leaf <= 5; ++leaf) {
    EXPECT_EQ(stats.in_degree.at(id(leaf)), 1u);
    EXPECT_EQ(stats.out_degree.at(id(leaf)), 0u);
  }
  EXPECT_EQ(stats.max_out, 5u);
  EXPECT_EQ(stats.total_edges, 5u);
}

TEST(DegreeStatsTest, EmptyEdgeSet) {
  TempDir dir("deg_empty");
  write_file(dir.file("nodes.tsv"), "0\t0.0\t\n1\t0.0\t\n");
  write_file(dir.file("edges.tsv"), "");
  const DegreeStats stats =
      compute_degree_stats(ingest_tables(dir.file("nodes.tsv"), dir.file("edges.tsv")));
  EXPECT_EQ(stats.total_edges, 0u);
  EXPECT_EQ(stats.sum_in(), 0u);
  EXPECT_EQ(stats.sum_out(), 0u);
  EXPECT_EQ(stats.max_in, 0u);
}

// Conservation on generator output: sum(in) = sum(out) = |E|.
TEST(DegreeStatsTest, GeneratorConservation) {
  PowerLawConfig cfg;
  cfg.num_nodes = 1000;
  cfg.target_edges = 10000;
  cfg.exponent = 2.1;
  cfg.skew = SkewMode::kIn;
  cfg.seed = 0;
  const GeneratedGraph gen = generate_power_law(cfg);
  const DegreeStats stats = compute_degree_stats(gen.tables);
  EXPECT_EQ(stats.sum_in(), gen.tables.num_edges);
  EXPECT_EQ(stats.sum_out(), gen.tables.num_edges);
  EXPECT_EQ(stats.total_edges, gen.tables.num_edges);
}

TEST(PartitionTest, PartitionsCoverGraphExactly) {
  PowerLawConfig cfg;
  cfg.num_nodes = 200;
  cfg.target_edges = 1000;
  cfg.seed = 3;
  const GraphTables g = generate_power_law(cfg).tables;

  for (std::uint32_t w : {1u, 2u, 8u}) {
    const auto parts = build_partitions(g, w);
    ASSERT_EQ(parts.size(), w);
    std::uint64_t nodes_seen = 0;
    std::uint64_t edges_seen = 0;
    for (const GraphPartition& p : parts) {
      for (const auto& [nid, rec] : p.nodes) {
        EXPECT_EQ(partition_of(nid, w), p.worker_id);
        // Each partition carries all out-edges of its nodes.
        EXPECT_EQ(rec.out_nbrs.size(), g.node(nid).out_nbrs.size());
        edges_seen += rec.out_nbrs.size();
      }
      nodes_seen += p.nodes.size();
    }
    EXPECT_EQ(nodes_seen, g.nodes.size());
    EXPECT_EQ(edges_seen, g.num_edges);
  }
}

}  // namespace
}  // namespace ginfer
