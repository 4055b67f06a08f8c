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

#include "ginfer/node_id.hpp"

#include <set>

#include "gtest/gtest.h"

namespace ginfer {
namespace {

TEST(NodeIdTest, OrderingMirrorsAfterPhysical) {
  const NodeId physical{7, std::nullopt};
  const NodeId m0{7, 0};
  const NodeId m1{7, 1};
  EXPECT_LT(physical, m0);
  EXPECT_LT(m0, m1);
  EXPECT_LT((NodeId{6, 3}), physical);
  EXPECT_LT(m1, (NodeId{8, std::nullopt}));
}

TEST(NodeIdTest, SerializationRoundTrip) {
  EXPECT_EQ(to_string(NodeId{42, std::nullopt}), "42");
  EXPECT_EQ(to_string(NodeId{42, 3}), "42#3");

  auto parsed = parse_node_id("42");
  ASSERT_TRUE(parsed.has_value());
  EXPECT_EQ(parsed->raw, 42u);
  EXPECT_FALSE(parsed->is_mirror());

  parsed = parse_node_id("42#3");
  ASSERT_TRUE(parsed.has_value());
  EXPECT_EQ(parsed->raw, 42u);
  ASSERT_TRUE(parsed->mirror_group.has_value());
  EXPECT_EQ(*parsed->mirror_group, 3u);

  EXPECT_FALSE(parse_node_id("").has_value());
  EXPECT_FALSE(parse_node_id("x7").has_value());
  EXPECT_FALSE(parse_node_id("7#").has_value());
  EXPECT_FALSE(parse_node_id("7#1#2").has_value());
  EXPECT_FALSE(parse_node_id("7 ").has_value());
}

TEST(NodeIdTest, PartitionOfPhysicalIsMod) {
  EXPECT_EQ(partition_of(NodeId{7, std::nullopt}, 4), 3u);
  EXPECT_EQ(partition_of(NodeId{8, std::nullopt}, 4), 0u);
  EXPECT_EQ(partition_of(NodeId{0, std::nullopt}, 1), 0u);
}

TEST(NodeIdTest, PartitionIsStable) {
  for (std::uint64_t raw : {0ull, 1ull, 7ull, 123456789ull}) {
    for (std::uint32_t w : {1u, 2u, 8u, 13u}) {
      const NodeId id{raw, std::nullopt};
      EXPECT_EQ(partition_of(id, w), partition_of(id, w));
      EXPECT_LT(partition_of(id, w), w);
      const NodeId mirror{raw, 2};
      EXPECT_EQ(partition_of(mirror, w), partition_of(mirror, w));
      EXPECT_LT(partition_of(mirror, w), w);
    }
  }
}

// Mirrors of one node must not all collapse onto raw % W; enumerating the
// hash over groups 0..3 at W=4 has to reach at least two distinct workers.
TEST(NodeIdTest, MirrorsSpreadAcrossWorkers) {
  std::set<std::uint32_t> workers;
  for (std::uint32_t g = 0; g < 4; ++g) {
    workers.insert(partition_of(NodeId{7, g}, 4));
  }
  EXPECT_GE(workers.size(), 2u);
}

}  // namespace
}  // namespace ginfer
