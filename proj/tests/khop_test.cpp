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

#include "ginfer/khop.hpp"

#include "ginfer/generate.hpp"
#include "ginfer/oracle.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace ginfer {
namespace {

using ginfer::testing::make_graph;

NodeId id(std::uint64_t raw) { return NodeId{raw, std::nullopt}; }

TEST(KHopTest, PathGraphNeighborhood) {
  // 1 -> 2 -> 3 -> 4 -> 5
  const GraphTables g = make_graph(6, {{1, 2}, {2, 3}, {3, 4}, {4, 5}});
  const GraphIndex index(g);
  const KHopNeighborhood hood = build_khop(index, id(5), 2);

  ASSERT_EQ(hood.nodes.size(), 3u);
  EXPECT_EQ(hood.nodes.at(id(5)).dist, 0u);
  EXPECT_EQ(hood.nodes.at(id(4)).dist, 1u);
  EXPECT_EQ(hood.nodes.at(id(3)).dist, 2u);

  EXPECT_EQ(hood.in_edges.at(id(5)).size(), 1u);
  EXPECT_EQ(hood.in_edges.at(id(4)).size(), 1u);
  // Node 3 sits on the fringe: its in-edge from 2 is not induced.
  EXPECT_TRUE(hood.in_edges.at(id(3)).empty());
  EXPECT_EQ(hood.edge_count, 2u);
}

TEST(KHopTest, HopZeroIsTargetOnly) {
  const GraphTables g = make_graph(3, {{0, 1}, {1, 2}});
  const GraphIndex index(g);
  const KHopNeighborhood hood = build_khop(index, id(2), 0);
  EXPECT_EQ(hood.nodes.size(), 1u);
  EXPECT_TRUE(hood.nodes.count(id(2)));
}

TEST(KHopTest, CarriesGlobalDegrees) {
  // 0 has out-degree 3 but only the edge to 1 is inside a 1-hop hood of 1.
  const GraphTables g = make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  const GraphIndex index(g);
  const KHopNeighborhood hood = build_khop(index, id(1), 1);
  EXPECT_EQ(hood.nodes.at(id(0)).out_degree, 3u);
  EXPECT_EQ(hood.nodes.at(id(1)).in_degree, 1u);
}

TEST(KHopTest, FusedForwardRequiresDepth) {
  const GraphTables g = make_graph(3, {{0, 1}, {1, 2}});
  const GraphIndex index(g);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 2, 4, 2, 2, 5);
  const KHopNeighborhood shallow = build_khop(index, id(2), 1);
  EXPECT_THROW(fused_forward(model, shallow), std::invalid_argument);
}

TEST(KHopTest, IsolatedNodePredictionUsesOwnFeaturesOnly) {
  const GraphTables g = make_graph(1, {});
  const GraphIndex index(g);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 2, 4, 2, 2, 5);
  const KHopNeighborhood hood = build_khop(index, id(0), 2);
  const Prediction p = fused_forward(model, hood);

  // Two-route check: chain apply_node with empty aggregates by hand.
  NodeState state{g.node(id(0)).features, 0};
  const NodeContext ctx{0, false};
  state = apply_node(model.layers[0], state,
                     AggregateState::empty(AggregateKind::kSumCount), ctx, false);
  state = apply_node(model.layers[1], state,
                     AggregateState::empty(AggregateKind::kSumCount), ctx, true);
  const Prediction expected = predict(model.head, state);

  ASSERT_EQ(p.logits.size(), expected.logits.size());
  for (std::size_t i = 0; i < p.logits.size(); ++i) {
    EXPECT_FLOAT_EQ(p.logits[i], expected.logits[i]);
  }
  EXPECT_EQ(p.predicted_class, expected.predicted_class);
}

// K=1 star: the center's output has the closed form
// head(W_self x_c + W_nbr mean(x_leaves) + b).
TEST(KHopTest, StarCenterClosedForm) {
  const GraphTables g = make_graph(5, {{1, 0}, {2, 0}, {3, 0}, {4, 0}});
  const GraphIndex index(g);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 2, 4, 2, 1, 9);

  const KHopNeighborhood hood = build_khop(index, id(0), 1);
  const Prediction p = fused_forward(model, hood);

  DenseVector mean(2, 0.0f);
  for (std::uint64_t leaf = 1; leaf <= 4; ++leaf) {
    add_in_place(mean, g.node(id(leaf)).features);
  }
  for (float& x : mean) x /= 4.0f;
  DenseVector h = matvec(model.layers[0].w_self, g.node(id(0)).features);
  add_in_place(h, matvec(model.layers[0].w_nbr, mean));
  add_in_place(h, model.layers[0].bias);
  DenseVector logits = matvec(model.head.w_out, h);
  add_in_place(logits, model.head.b_out);

  ASSERT_EQ(p.logits.size(), logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    EXPECT_NEAR(p.logits[i], logits[i], 1e-5f);
  }
}

TEST(KHopTest, OracleCountersGrowWithDepth) {
  PowerLawConfig cfg;
  cfg.num_nodes = 200;
  cfg.target_edges = 1200;
  cfg.skew = SkewMode::kIn;
  cfg.seed = 4;
  cfg.feature_dim = 4;
  const GraphTables g = generate_power_law(cfg).tables;

  std::uint64_t prev = 0;
  for (std::uint32_t k = 1; k <= 3; ++k) {
    const ModelBundle model = seeded_random_model(GnnAlgorithm::kSage, 4, 4, 2, k, 1);
    OracleCounters counters;
    oracle_khop_forward(g, model, &counters);
    EXPECT_GT(counters.message_computations, prev);
    prev = counters.message_computations;
  }
}

TEST(KHopTest, GatSelfLoopEdgeHandledLocally) {
  // Self-loop at node 0 plus an in-edge from 1. The fused forward must skip
  // the (0,0) message and add the local self term instead.
  const GraphTables g = make_graph(2, {{0, 0}, {1, 0}});
  const GraphIndex index(g);
  const ModelBundle model = seeded_random_model(GnnAlgorithm::kGat, 2, 4, 2, 1, 3);
  const KHopNeighborhood hood = build_khop(index, id(0), 1);

  ASSERT_TRUE(hood.nodes.at(id(0)).has_self_loop);
  const Prediction p = fused_forward(model, hood);

  // By hand: one union entry from node 1, self term from node 0.
  const GnnLayer& layer = model.layers[0];
  const NodeContext ctx1{g.node(id(1)).logical_out_degree, false};
  AggregateState agg = AggregateState::empty(AggregateKind::kUnion);
  agg.add_message(id(1), apply_edge(layer, NodeState{g.node(id(1)).features, 0}, ctx1,
                                    OutEdge{id(0), {}}));
  const NodeContext ctx0{g.node(id(0)).logical_out_degree, true};
  const NodeState updated =
      apply_node(layer, NodeState{g.node(id(0)).features, 0}, agg, ctx0, true);
  const Prediction expected = predict(model.head, updated);

  for (std::size_t i = 0; i < p.logits.size(); ++i) {
    EXPECT_FLOAT_EQ(p.logits[i], expected.logits[i]);
  }
}

}  // namespace
}  // namespace ginfer
