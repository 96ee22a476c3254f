//
// Copyright 2026 The dpstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpstream/hierarchy.h"

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/status_matchers.h"

namespace dpstream {
namespace {

using ::dpstream::testing::IsOk;
using ::dpstream::testing::StatusIs;
using ::testing::ElementsAre;

PartitionTree MakeTree(int dim = 2, int fanout = 2, int max_depth = 8) {
  return *PartitionTree::Create(Domain::UnitCube(dim), fanout, max_depth);
}

NodeId At(const PartitionTree& tree, std::vector<int> path) {
  return *tree.FromPath(path);
}

// Parent-closed, fully expanded random subtree.
std::vector<NodeId> RandomSubtree(const PartitionTree& tree, int depth,
                                  double expand, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(expand);
  std::vector<NodeId> nodes = {NodeId::Root()};
  for (size_t i = 0; i < nodes.size(); ++i) {
    const NodeId v = nodes[i];
    if (static_cast<int>(v.depth) < depth && coin(rng)) {
      for (NodeId c : tree.Children(v)) nodes.push_back(c);
    }
  }
  return nodes;
}

std::vector<NodeId> Leaves(const PartitionTree& tree,
                           const std::vector<NodeId>& nodes) {
  std::set<NodeId> members(nodes.begin(), nodes.end());
  std::vector<NodeId> leaves;
  for (NodeId v : nodes) {
    if (static_cast<int>(v.depth) == tree.max_depth() ||
        !members.contains(tree.Child(v, 0))) {
      leaves.push_back(v);
    }
  }
  return leaves;
}

TEST(PartitionTreeTest, RejectsBadShape) {
  EXPECT_THAT(PartitionTree::Create(Domain::UnitCube(2), 1, 4),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PartitionTree::Create(Domain::UnitCube(2), 2, 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PartitionTree::Create(Domain::UnitCube(2), 2, 63),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(PartitionTreeTest, PathRoundTrip) {
  PartitionTree tree = MakeTree(2, 3, 6);
  NodeId v = At(tree, {2, 0, 1, 2});
  EXPECT_THAT(tree.Path(v), ElementsAre(2, 0, 1, 2));
  EXPECT_EQ(tree.ToString(v), "[2,0,1,2]");
  EXPECT_EQ(tree.Parent(v), At(tree, {2, 0, 1}));
  EXPECT_EQ(tree.AncestorAt(v, 1), At(tree, {2}));
  EXPECT_TRUE(tree.IsAncestorOrSelf(At(tree, {2, 0}), v));
  EXPECT_FALSE(tree.IsAncestorOrSelf(At(tree, {1}), v));
  EXPECT_THAT(tree.FromPath(std::vector<int>{3}),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(RegionTest, RootIsDomain) {
  PartitionTree tree = MakeTree();
  absl::StatusOr<Box> box = tree.Region(NodeId::Root());
  ASSERT_THAT(box, IsOk());
  EXPECT_THAT(box->lo, ElementsAre(0.0, 0.0));
  EXPECT_THAT(box->hi, ElementsAre(1.0, 1.0));
  EXPECT_THAT(box->hi_closed, ElementsAre(true, true));
}

TEST(RegionTest, FirstSplitHalvesDimensionZero) {
  PartitionTree tree = MakeTree();
  absl::StatusOr<Box> box = tree.Region(At(tree, {0}));
  ASSERT_THAT(box, IsOk());
  EXPECT_THAT(box->lo, ElementsAre(0.0, 0.0));
  EXPECT_THAT(box->hi, ElementsAre(0.5, 1.0));
  EXPECT_THAT(box->hi_closed, ElementsAre(false, true));
}

TEST(RegionTest, UpperCornerStaysClosed) {
  PartitionTree tree = MakeTree();
  absl::StatusOr<Box> box = tree.Region(At(tree, {1, 1}));
  ASSERT_THAT(box, IsOk());
  EXPECT_THAT(box->lo, ElementsAre(0.5, 0.5));
  EXPECT_THAT(box->hi, ElementsAre(1.0, 1.0));
  EXPECT_THAT(box->hi_closed, ElementsAre(true, true));
}

TEST(RegionTest, TooDeepIsOutOfRange) {
  PartitionTree tree = MakeTree(2, 2, 2);
  EXPECT_THAT(tree.Region(NodeId{3, 0}),
              StatusIs(absl::StatusCode::kOutOfRange));
}

TEST(LocateLeafTest, Examples) {
  PartitionTree tree = MakeTree();
  EXPECT_THAT(tree.LocateLeaf(std::vector<double>{0.1, 0.9}, 1),
              testing::IsOkAndHolds(At(tree, {0})));
  EXPECT_THAT(tree.LocateLeaf(std::vector<double>{0.5, 0.5}, 2),
              testing::IsOkAndHolds(At(tree, {1, 1})));
  EXPECT_THAT(tree.LocateLeaf(std::vector<double>{0.3, 0.3}, 0),
              testing::IsOkAndHolds(NodeId::Root()));
  EXPECT_THAT(tree.LocateLeaf(std::vector<double>{1.5, 0.3}, 2),
              StatusIs(absl::StatusCode::kOutOfRange));
}

TEST(LocateLeafTest, PartitionPropertyOnRandomPoints) {
  for (int fanout : {2, 3}) {
    PartitionTree tree = MakeTree(2, fanout, 5);
    std::mt19937_64 rng(fanout);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> depth_dist(0, tree.max_depth());
    for (int i = 0; i < 10000; ++i) {
      // Snap a quarter of the points onto split boundaries.
      std::vector<double> p = {unit(rng), unit(rng)};
      if (i % 4 == 0) p[0] = std::round(p[0] * 8) / 8;
      if (i % 4 == 1) p[1] = 1.0;
      const int depth = depth_dist(rng);
      absl::StatusOr<NodeId> leaf = tree.LocateLeaf(p, depth);
      ASSERT_THAT(leaf, IsOk());
      int containing = 0;
      for (uint64_t j = 0; j < tree.Power(depth); ++j) {
        NodeId v{static_cast<uint32_t>(depth), j};
        if (tree.Region(v)->Contains(p)) {
          ++containing;
          EXPECT_EQ(v, *leaf);
        }
      }
      EXPECT_EQ(containing, 1) << p[0] << "," << p[1] << " depth " << depth;
    }
  }
}

TEST(RegionTest, ChildrenTileParent) {
  PartitionTree tree = MakeTree(3, 3, 4);
  std::mt19937_64 rng(2);
  std::vector<NodeId> nodes = RandomSubtree(tree, 3, 0.6, rng);
  for (NodeId v : nodes) {
    if (static_cast<int>(v.depth) == tree.max_depth()) continue;
    double volume = 0.0;
    for (NodeId c : tree.Children(v)) volume += tree.Region(c)->Volume();
    EXPECT_NEAR(volume, tree.Region(v)->Volume(), 1e-12);
  }
}

TEST(ContractTest, CountsPerHalf) {
  PartitionTree tree = MakeTree();
  Batch batch{.time = 1, .events = {{{0.1, 0.2}, 1}, {{0.6, 0.7}, 1}}};
  std::vector<NodeId> nodes = {NodeId::Root(), At(tree, {0}), At(tree, {1})};
  TreeFunction f = Contract(tree, batch, nodes);
  EXPECT_EQ(f.at(NodeId::Root()), 2.0);
  EXPECT_EQ(f.at(At(tree, {0})), 1.0);
  EXPECT_EQ(f.at(At(tree, {1})), 1.0);
}

TEST(ContractTest, AddAndDeleteCancel) {
  PartitionTree tree = MakeTree();
  Batch batch{.time = 1, .events = {{{0.3, 0.3}, 1}, {{0.3, 0.3}, -1}}};
  std::vector<NodeId> nodes = {NodeId::Root(), At(tree, {0}), At(tree, {1})};
  TreeFunction f = Contract(tree, batch, nodes);
  for (NodeId v : nodes) EXPECT_EQ(f.at(v), 0.0);
}

TEST(ContractTest, SignedHalves) {
  PartitionTree tree = MakeTree();
  Batch batch{.time = 1,
              .events = {{{0.1, 0.1}, 1},
                         {{0.2, 0.9}, 1},
                         {{0.4, 0.5}, 1},
                         {{0.9, 0.2}, -1}}};
  std::vector<NodeId> nodes = {At(tree, {0}), At(tree, {1})};
  TreeFunction f = Contract(tree, batch, nodes);
  EXPECT_EQ(f.at(At(tree, {0})), 3.0);
  EXPECT_EQ(f.at(At(tree, {1})), -1.0);
}

TEST(ContractTest, LinearInEvents) {
  PartitionTree tree = MakeTree(2, 2, 6);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution sign(0.7);
  for (int trial = 0; trial < 50; ++trial) {
    Batch a{.time = 1, .events = {}}, b{.time = 1, .events = {}};
    for (int i = 0; i < 40; ++i) {
      (i % 2 ? a : b).events.push_back(
          {{unit(rng), unit(rng)}, sign(rng) ? 1 : -1});
    }
    Batch both = a;
    both.events.insert(both.events.end(), b.events.begin(), b.events.end());
    std::vector<NodeId> nodes = RandomSubtree(tree, 6, 0.7, rng);
    TreeFunction fa = Contract(tree, a, nodes);
    TreeFunction fb = Contract(tree, b, nodes);
    TreeFunction fab = Contract(tree, both, nodes);
    for (NodeId v : nodes) EXPECT_EQ(fab.at(v), fa.at(v) + fb.at(v));
  }
}

TEST(DirectedDistanceTest, Examples) {
  PartitionTree tree = MakeTree();
  NodeId v = At(tree, {0, 1});
  EXPECT_EQ(tree.DirectedDistance(v, v), 0);
  EXPECT_EQ(tree.DirectedDistance(NodeId::Root(), At(tree, {0, 1})), 2);
  EXPECT_EQ(tree.DirectedDistance(At(tree, {0}), At(tree, {1})), -2);
  EXPECT_EQ(tree.DirectedDistance(At(tree, {0, 1}), NodeId::Root()), -2);
}

TEST(IsConsistentTest, Examples) {
  PartitionTree tree = MakeTree();
  std::vector<NodeId> depth1 = {NodeId::Root(), At(tree, {0}), At(tree, {1})};
  TreeFunction f;
  f.Set(NodeId::Root(), 2);
  f.Set(At(tree, {0}), 1);
  f.Set(At(tree, {1}), 1);
  EXPECT_TRUE(IsConsistent(tree, f, depth1));
  f.Set(At(tree, {1}), 0.5);
  EXPECT_FALSE(IsConsistent(tree, f, depth1));
  std::vector<NodeId> root_only = {NodeId::Root()};
  EXPECT_TRUE(IsConsistent(tree, f, root_only));
}

TEST(ExtTest, SpreadsDownAndPushesUp) {
  PartitionTree tree = MakeTree();
  TreeFunction d;
  d.Set(At(tree, {0}), 1.0);
  std::vector<NodeId> query = {NodeId::Root(), At(tree, {0}), At(tree, {1}),
                               At(tree, {0, 0}), At(tree, {0, 1})};
  absl::StatusOr<TreeFunction> g = Ext(tree, d, query);
  ASSERT_THAT(g, IsOk());
  EXPECT_EQ(g->at(NodeId::Root()), 1.0);
  EXPECT_EQ(g->at(At(tree, {0})), 1.0);
  EXPECT_EQ(g->at(At(tree, {0, 0})), 0.5);
  EXPECT_EQ(g->at(At(tree, {0, 1})), 0.5);
  EXPECT_EQ(g->at(At(tree, {1})), 0.0);
  EXPECT_TRUE(IsConsistent(tree, *g, query));
}

TEST(ExtTest, RootIsSumOfSupport) {
  PartitionTree tree = MakeTree();
  TreeFunction d;
  d.Set(At(tree, {0}), 1.0);
  d.Set(At(tree, {1}), 3.0);
  std::vector<NodeId> query = {NodeId::Root()};
  EXPECT_THAT(Ext(tree, d, query),
              testing::IsOkAndHolds(::testing::Property(
                  &TreeFunction::size, 1u)));
  EXPECT_EQ(Ext(tree, d, query)->at(NodeId::Root()), 4.0);
}

TEST(ExtTest, RejectsNestedSupport) {
  PartitionTree tree = MakeTree();
  TreeFunction d;
  d.Set(At(tree, {0}), 1.0);
  d.Set(At(tree, {0, 1}), 1.0);
  std::vector<NodeId> query = {NodeId::Root()};
  EXPECT_THAT(Ext(tree, d, query),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ExtTest, ConsistentOnRandomSubtreesAndPreservesMass) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> value(-50.0, 50.0);
  for (int fanout : {2, 3}) {
    PartitionTree tree = MakeTree(2, fanout, 6);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<NodeId> support =
          Leaves(tree, RandomSubtree(tree, 6, 0.6, rng));
      TreeFunction d;
      double mass = 0.0;
      for (NodeId v : support) {
        const double x = value(rng);
        d.Set(v, x);
        mass += x;
      }
      std::vector<NodeId> query = RandomSubtree(tree, 6, 0.6, rng);
      absl::StatusOr<TreeFunction> g = Ext(tree, d, query);
      ASSERT_THAT(g, IsOk());
      EXPECT_TRUE(IsConsistent(tree, *g, query));
      EXPECT_NEAR(g->at(NodeId::Root()), mass, 1e-9 * (1 + std::abs(mass)));
    }
  }
}

TEST(ExtensionWeightTest, ThreeCases) {
  PartitionTree tree = MakeTree(2, 3, 6);
  NodeId v = At(tree, {1, 2});
  EXPECT_EQ(ExtensionWeight(tree, v, NodeId::Root()), 1.0);
  EXPECT_EQ(ExtensionWeight(tree, v, v), 1.0);
  EXPECT_DOUBLE_EQ(ExtensionWeight(tree, v, At(tree, {1, 2, 0, 1})),
                   1.0 / 9.0);
  EXPECT_EQ(ExtensionWeight(tree, v, At(tree, {1, 1})), 0.0);
  EXPECT_EQ(ExtensionWeight(tree, v, At(tree, {0})), 0.0);
}

}  // namespace
}  // namespace dpstream
