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

#include "ginfer/pregel.hpp"

#include "ginfer/generate.hpp"
#include "ginfer/oracle.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace ginfer {
namespace {

using ginfer::testing::make_graph;

NodeId id(std::uint64_t raw) { return NodeId{raw, std::nullopt}; }

GraphTables small_random_graph(std::uint64_t nodes, std::uint64_t edges,
                               std::uint64_t seed, SkewMode skew = SkewMode::kIn) {
  PowerLawConfig cfg;
  cfg.num_nodes = nodes;
  cfg.target_edges = edges;
  cfg.skew = skew;
  cfg.seed = seed;
  cfg.feature_dim = 4;
  return generate_power_law(cfg).tables;
}

void expect_rows_close(const std::vector<OutputRow>& a, const std::vector<OutputRow>& b,
                       double atol) {
  const ComparisonReport report = compare_outputs(a, b);
  EXPECT_LE(report.max_abs_diff, atol);
  EXPECT_EQ(report.mismatched_class_count, 0u);
}

void expect_rows_identical(const std::vector<OutputRow>& a,
                           const std::vector<OutputRow>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].predicted_class, b[i].predicted_class);
    EXPECT_EQ(a[i].logits, b[i].logits);  // bitwise
  }
}

TEST(PregelTest, SingleWorkerMatchesOracle) {
  const GraphTables g = small_random_graph(60, 300, 1);
  for (GnnAlgorithm alg : {GnnAlgorithm::kSage, GnnAlgorithm::kGat, GnnAlgorithm::kGcn}) {
    const ModelBundle model = seeded_random_model(alg, 4, 8, 2, 2, 11);
    const InferenceResult result = run_pregel_inference(g, model, 1);
    const std::vector<OutputRow> oracle = oracle_khop_forward(g, model);
    expect_rows_close(result.outputs, oracle, 1e-4);
  }
}

TEST(PregelTest, WorkerCountsAgree) {
  const GraphTables g = small_random_graph(120, 700, 2);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 8, 2, 2, 3);
  const InferenceResult w1 = run_pregel_inference(g, model, 1);
  const InferenceResult w2 = run_pregel_inference(g, model, 2);
  const InferenceResult w8 = run_pregel_inference(g, model, 8);
  expect_rows_close(w1.outputs, w2.outputs, 1e-4);
  expect_rows_close(w1.outputs, w8.outputs, 1e-4);
}

TEST(PregelTest, RepeatedRunsAreIdentical) {
  const GraphTables g = small_random_graph(100, 600, 3);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kGat, 4, 8, 2, 2, 5);
  const InferenceResult a = run_pregel_inference(g, model, 4);
  const InferenceResult b = run_pregel_inference(g, model, 4);
  expect_rows_identical(a.outputs, b.outputs);
}

// BSP isolation: worker scheduling order must not leak into results.
TEST(PregelTest, SchedulingOrderIndependence) {
  const GraphTables g = small_random_graph(100, 600, 4);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kGcn, 4, 8, 2, 2, 7);

  PregelOptions forward;
  forward.parallel = false;
  PregelOptions reverse;
  reverse.parallel = false;
  reverse.reverse_worker_order = true;
  PregelOptions threaded;
  threaded.parallel = true;

  const auto a = run_pregel_inference(g, model, 5, {}, forward);
  const auto b = run_pregel_inference(g, model, 5, {}, reverse);
  const auto c = run_pregel_inference(g, model, 5, {}, threaded);
  expect_rows_identical(a.outputs, b.outputs);
  expect_rows_identical(a.outputs, c.outputs);
}

TEST(PregelTest, MessagesPerLayerEqualEdgeCount) {
  const GraphTables g = small_random_graph(80, 400, 5);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 8, 2, 3, 1);
  const InferenceResult result = run_pregel_inference(g, model, 4);

  ASSERT_EQ(result.metrics.num_steps, 4u);
  for (std::uint32_t step = 0; step < 3; ++step) {
    EXPECT_EQ(result.metrics.step_msgs_out(step), g.num_edges) << "step " << step;
  }
  EXPECT_EQ(result.metrics.step_msgs_out(3), 0u);
  EXPECT_TRUE(result.metrics.conserves_messages());
}

TEST(PregelTest, OneOutputRowPerPhysicalNode) {
  const GraphTables g = small_random_graph(77, 300, 6);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 8, 2, 1, 2);
  const InferenceResult result = run_pregel_inference(g, model, 3);
  EXPECT_EQ(result.outputs.size(), g.nodes.size());
  for (const OutputRow& row : result.outputs) {
    EXPECT_FALSE(row.id.is_mirror());
  }
}

TEST(PregelTest, EmptyInboxNodesAreHandled) {
  // 0 and 1 isolated; 2 -> 3.
  const GraphTables g = make_graph(4, {{2, 3}}, 4);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 8, 2, 2, 9);
  const InferenceResult result = run_pregel_inference(g, model, 2);
  EXPECT_EQ(result.outputs.size(), 4u);
  expect_rows_close(result.outputs, oracle_khop_forward(g, model), 1e-4);
}

TEST(PregelTest, PartialGatherMatchesBaseline) {
  const GraphTables g = small_random_graph(150, 900, 7);
  for (GnnAlgorithm alg : {GnnAlgorithm::kSage, GnnAlgorithm::kGcn}) {
    const ModelBundle model = seeded_random_model(alg, 4, 8, 2, 2, 13);
    const InferenceResult baseline = run_pregel_inference(g, model, 4);
    StrategyConfig pg;
    pg.partial_gather = true;
    const InferenceResult combined = run_pregel_inference(g, model, 4, pg);
    expect_rows_close(baseline.outputs, combined.outputs, 1e-5);

    // Sender-side combining must cap per-node inbound traffic at W and
    // strictly reduce message volume on a graph with shared destinations.
    EXPECT_LE(combined.metrics.max_node_msgs_in_any_step(), 4u);
    EXPECT_LT(combined.metrics.total_msgs_out(), baseline.metrics.total_msgs_out());
    std::uint64_t savings = 0;
    for (const auto& row : combined.metrics.rows) savings += row.combiner_savings;
    EXPECT_GT(savings, 0u);
  }
}

TEST(PregelTest, PartialGatherIsNoOpForUnionAggregates) {
  const GraphTables g = small_random_graph(100, 500, 8);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kGat, 4, 8, 2, 2, 3);
  const InferenceResult baseline = run_pregel_inference(g, model, 4);
  StrategyConfig pg;
  pg.partial_gather = true;
  const InferenceResult attempted = run_pregel_inference(g, model, 4, pg);
  // Union aggregates are not size-reducing; the bucket passes through.
  EXPECT_EQ(baseline.metrics.total_msgs_out(), attempted.metrics.total_msgs_out());
  expect_rows_identical(baseline.outputs, attempted.outputs);
}

TEST(PregelTest, BroadcastMatchesBaselineAndCutsHubBytes) {
  // Out-skewed graph so some nodes exceed the hub threshold.
  const GraphTables g = small_random_graph(200, 2000, 9, SkewMode::kOut);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 8, 2, 2, 21);
  const InferenceResult baseline = run_pregel_inference(g, model, 8);
  StrategyConfig bc;
  bc.broadcast = true;
  const InferenceResult broadcast = run_pregel_inference(g, model, 8, bc);
  expect_rows_close(baseline.outputs, broadcast.outputs, 1e-5);

  std::uint64_t payloads = 0;
  for (const auto& row : broadcast.metrics.rows) payloads += row.bcast_payloads_out;
  EXPECT_GT(payloads, 0u);
  EXPECT_LT(broadcast.metrics.total_bytes_out(), baseline.metrics.total_bytes_out());
}

TEST(PregelTest, ShadowNodesMatchBaselineAndMirrorsAgree) {
  const GraphTables g = small_random_graph(200, 2000, 10, SkewMode::kOut);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kGcn, 4, 8, 2, 2, 23);
  const InferenceResult baseline = run_pregel_inference(g, model, 8);

  StrategyConfig sn;
  sn.shadow_nodes = true;
  PregelOptions opts;
  opts.capture_final_states = true;
  const InferenceResult shadowed = run_pregel_inference(g, model, 8, sn, opts);
  expect_rows_close(baseline.outputs, shadowed.outputs, 1e-4);

  // Every mirror of a split node must end with the same final embedding.
  std::map<std::uint64_t, const DenseVector*> reference;
  bool saw_mirror = false;
  for (const auto& [nid, embedding] : shadowed.final_states) {
    if (!nid.is_mirror()) continue;
    saw_mirror = true;
    auto [it, inserted] = reference.emplace(nid.raw, &embedding);
    if (!inserted) {
      EXPECT_EQ(*it->second, embedding) << "mirrors of " << nid.raw << " diverged";
    }
  }
  EXPECT_TRUE(saw_mirror);
}

TEST(PregelTest, AllStrategiesTogetherMatchOracle) {
  const GraphTables g = small_random_graph(150, 1500, 11, SkewMode::kOut);
  for (GnnAlgorithm alg : {GnnAlgorithm::kSage, GnnAlgorithm::kGat, GnnAlgorithm::kGcn}) {
    const ModelBundle model = seeded_random_model(alg, 4, 8, 2, 2, 31);
    StrategyConfig all;
    all.partial_gather = true;
    all.broadcast = true;
    all.shadow_nodes = true;
    const InferenceResult result = run_pregel_inference(g, model, 8, all);
    expect_rows_close(result.outputs, oracle_khop_forward(g, model), 1e-4);
  }
}

TEST(PregelTest, RejectsFeatureDimMismatch) {
  const GraphTables g = small_random_graph(10, 20, 12);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 6, 8, 2, 2, 1);
  EXPECT_THROW(run_pregel_inference(g, model, 2), std::invalid_argument);
}

}  // namespace
}  // namespace ginfer
