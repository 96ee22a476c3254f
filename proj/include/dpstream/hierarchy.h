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

#ifndef DPSTREAM_HIERARCHY_H_
#define DPSTREAM_HIERARCHY_H_

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpstream/stream.h"

namespace dpstream {

// A vertex of the implicit fanout-ary partition tree. The child-index path
// from the root is packed into `index` as a base-fanout number with `depth`
// digits, so the root is {0, 0} and child i of v is {v.depth + 1,
// v.index * fanout + i}.
struct NodeId {
  uint32_t depth = 0;
  uint64_t index = 0;

  static constexpr NodeId Root() { return NodeId{}; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const NodeId& v) {
    return H::combine(std::move(h), v.depth, v.index);
  }
};

// Axis-aligned box. Each side is [lo, hi), or [lo, hi] when hi_closed.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> hi_closed;

  int dim() const { return static_cast<int>(lo.size()); }
  bool Contains(std::span<const double> p) const;
  double Volume() const;
};

// Hierarchical partition of a Domain. Depth k splits dimension k mod dim
// into `fanout` equal parts; the last part inherits the parent's closed
// upper edge, every other part is half-open.
class PartitionTree {
 public:
  static absl::StatusOr<PartitionTree> Create(Domain domain, int fanout,
                                              int max_depth);

  const Domain& domain() const { return domain_; }
  int fanout() const { return fanout_; }
  int max_depth() const { return max_depth_; }
  // fanout^k for k in [0, max_depth].
  uint64_t Power(int k) const { return powers_[k]; }

  bool IsValid(NodeId v) const;
  NodeId Child(NodeId v, int i) const {
    return NodeId{v.depth + 1, v.index * static_cast<uint64_t>(fanout_) + i};
  }
  NodeId Parent(NodeId v) const {
    return NodeId{v.depth - 1, v.index / static_cast<uint64_t>(fanout_)};
  }
  // Ancestor of v at `depth` (<= v.depth).
  NodeId AncestorAt(NodeId v, uint32_t depth) const;
  std::vector<NodeId> Children(NodeId v) const;
  bool IsAncestorOrSelf(NodeId ancestor, NodeId v) const;
  int ChildDigit(NodeId v, uint32_t level) const;

  // Child-index path from the root.
  std::vector<int> Path(NodeId v) const;
  absl::StatusOr<NodeId> FromPath(std::span<const int> path) const;

  absl::StatusOr<Box> Region(NodeId v) const;
  absl::StatusOr<NodeId> LocateLeaf(std::span<const double> p,
                                    int depth) const;

  // +graph distance when u is a descendant-or-self of v, -graph distance
  // otherwise.
  int DirectedDistance(NodeId v, NodeId u) const;

  std::string ToString(NodeId v) const;

 private:
  PartitionTree(Domain domain, int fanout, int max_depth,
                std::vector<uint64_t> powers)
      : domain_(std::move(domain)),
        fanout_(fanout),
        max_depth_(max_depth),
        powers_(std::move(powers)) {}

  // Lower edge of child i within [lo, hi]; i == fanout yields hi.
  double SplitPoint(double lo, double hi, int i) const;

  Domain domain_;
  int fanout_;
  int max_depth_;
  std::vector<uint64_t> powers_;  // fanout^k for k in [0, max_depth]
};

// Sparse real-valued function on tree vertices; absent keys read as 0.
class TreeFunction {
 public:
  double at(NodeId v) const {
    auto it = values_.find(v);
    return it == values_.end() ? 0.0 : it->second;
  }
  void Set(NodeId v, double x) { values_[v] = x; }
  void Add(NodeId v, double x) { values_[v] += x; }
  bool contains(NodeId v) const { return values_.contains(v); }
  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const TreeFunction&, const TreeFunction&) = default;

 private:
  std::map<NodeId, double> values_;
};

// F(v) = signed event weight inside Region(v), for each v in `nodes`.
TreeFunction Contract(const PartitionTree& tree, const Batch& batch,
                      std::span<const NodeId> nodes);

// True iff F(v) equals the sum of F over all children of v, within
// `tolerance` relative to max(1, |F(v)|, sum |F(child)|), at every node of
// `subtree` that has a child in `subtree`.
bool IsConsistent(const PartitionTree& tree, const TreeFunction& f,
                  std::span<const NodeId> subtree, double tolerance = 1e-9);

// Contribution of a unit mass at v to the consistent extension at u: 1 when
// u is a proper ancestor of v, fanout^-k when u is a depth-k
// descendant-or-self of v, 0 otherwise.
double ExtensionWeight(const PartitionTree& tree, NodeId v, NodeId u);

// Consistent extension of a function supported on an antichain, evaluated on
// `query_nodes`. Fails if the nonzero support is not an antichain.
absl::StatusOr<TreeFunction> Ext(const PartitionTree& tree,
                                 const TreeFunction& d,
                                 std::span<const NodeId> query_nodes);

// True when no element of `nodes` is a proper ancestor of another.
bool IsAntichain(const PartitionTree& tree, std::span<const NodeId> nodes);

}  // namespace dpstream

#endif  // DPSTREAM_HIERARCHY_H_
