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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace dpstream {

bool Box::Contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (size_t d = 0; d < p.size(); ++d) {
    if (!(p[d] >= lo[d])) return false;
    if (p[d] < hi[d]) continue;
    if (hi_closed[d] && p[d] <= hi[d]) continue;
    return false;
  }
  return true;
}

double Box::Volume() const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= hi[d] - lo[d];
  return v;
}

absl::StatusOr<PartitionTree> PartitionTree::Create(Domain domain, int fanout,
                                                    int max_depth) {
  if (fanout < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("Fanout must be >= 2, got ", fanout));
  }
  if (max_depth < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_depth must be >= 1, got ", max_depth));
  }
  std::vector<uint64_t> powers{1};
  constexpr uint64_t kLimit = uint64_t{1} << 62;
  for (int k = 1; k <= max_depth; ++k) {
    if (powers.back() > kLimit / static_cast<uint64_t>(fanout)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "fanout^max_depth overflows the node index (fanout ", fanout,
          ", max_depth ", max_depth, ")"));
    }
    powers.push_back(powers.back() * static_cast<uint64_t>(fanout));
  }
  return PartitionTree(std::move(domain), fanout, max_depth,
                       std::move(powers));
}

bool PartitionTree::IsValid(NodeId v) const {
  return v.depth <= static_cast<uint32_t>(max_depth_) &&
         v.index < powers_[v.depth];
}

NodeId PartitionTree::AncestorAt(NodeId v, uint32_t depth) const {
  return NodeId{depth, v.index / powers_[v.depth - depth]};
}

std::vector<NodeId> PartitionTree::Children(NodeId v) const {
  std::vector<NodeId> out;
  if (v.depth >= static_cast<uint32_t>(max_depth_)) return out;
  out.reserve(fanout_);
  for (int i = 0; i < fanout_; ++i) out.push_back(Child(v, i));
  return out;
}

bool PartitionTree::IsAncestorOrSelf(NodeId ancestor, NodeId v) const {
  return ancestor.depth <= v.depth && AncestorAt(v, ancestor.depth) == ancestor;
}

int PartitionTree::ChildDigit(NodeId v, uint32_t level) const {
  return static_cast<int>((v.index / powers_[v.depth - 1 - level]) %
                          static_cast<uint64_t>(fanout_));
}

std::vector<int> PartitionTree::Path(NodeId v) const {
  std::vector<int> path(v.depth);
  for (uint32_t k = 0; k < v.depth; ++k) path[k] = ChildDigit(v, k);
  return path;
}

absl::StatusOr<NodeId> PartitionTree::FromPath(
    std::span<const int> path) const {
  if (path.size() > static_cast<size_t>(max_depth_)) {
    return absl::OutOfRangeError(absl::StrCat(
        "Path depth ", path.size(), " exceeds max_depth ", max_depth_));
  }
  NodeId v = NodeId::Root();
  for (int digit : path) {
    if (digit < 0 || digit >= fanout_) {
      return absl::InvalidArgumentError(
          absl::StrCat("Path digit ", digit, " outside [0, ", fanout_, ")"));
    }
    v = Child(v, digit);
  }
  return v;
}

double PartitionTree::SplitPoint(double lo, double hi, int i) const {
  if (i == 0) return lo;
  if (i == fanout_) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / fanout_;
}

absl::StatusOr<Box> PartitionTree::Region(NodeId v) const {
  if (!IsValid(v)) {
    return absl::OutOfRangeError(absl::StrCat(
        "Node ", ToString(v), " is not in a tree of max_depth ", max_depth_));
  }
  const int dim = domain_.dim();
  Box box;
  box.lo.resize(dim);
  box.hi.resize(dim);
  box.hi_closed.assign(dim, true);
  for (int d = 0; d < dim; ++d) {
    box.lo[d] = domain_.bound(d).lo;
    box.hi[d] = domain_.bound(d).hi;
  }
  for (uint32_t k = 0; k < v.depth; ++k) {
    const int d = static_cast<int>(k % static_cast<uint32_t>(dim));
    const int digit = ChildDigit(v, k);
    const double lo = box.lo[d];
    const double hi = box.hi[d];
    box.lo[d] = SplitPoint(lo, hi, digit);
    box.hi[d] = SplitPoint(lo, hi, digit + 1);
    box.hi_closed[d] = box.hi_closed[d] && digit == fanout_ - 1;
  }
  return box;
}

absl::StatusOr<NodeId> PartitionTree::LocateLeaf(std::span<const double> p,
                                                 int depth) const {
  if (depth < 0 || depth > max_depth_) {
    return absl::OutOfRangeError(absl::StrCat(
        "Depth ", depth, " outside [0, ", max_depth_, "]"));
  }
  if (!domain_.Contains(p)) {
    return absl::OutOfRangeError(absl::StrCat(
        "Point (", absl::StrJoin(p, ", "), ") lies outside the domain"));
  }
  const int dim = domain_.dim();
  std::vector<double> lo(dim), hi(dim);
  for (int d = 0; d < dim; ++d) {
    lo[d] = domain_.bound(d).lo;
    hi[d] = domain_.bound(d).hi;
  }
  NodeId v = NodeId::Root();
  for (int k = 0; k < depth; ++k) {
    const int d = k % dim;
    int digit = 0;
    for (int i = fanout_ - 1; i > 0; --i) {
      if (p[d] >= SplitPoint(lo[d], hi[d], i)) {
        digit = i;
        break;
      }
    }
    const double new_lo = SplitPoint(lo[d], hi[d], digit);
    const double new_hi = SplitPoint(lo[d], hi[d], digit + 1);
    lo[d] = new_lo;
    hi[d] = new_hi;
    v = Child(v, digit);
  }
  return v;
}

int PartitionTree::DirectedDistance(NodeId v, NodeId u) const {
  if (IsAncestorOrSelf(v, u)) return static_cast<int>(u.depth - v.depth);
  uint32_t common = std::min(v.depth, u.depth);
  while (AncestorAt(v, common) != AncestorAt(u, common)) --common;
  return -static_cast<int>((v.depth - common) + (u.depth - common));
}

std::string PartitionTree::ToString(NodeId v) const {
  if (v.depth > static_cast<uint32_t>(max_depth_) ||
      v.index >= powers_[std::min<uint32_t>(v.depth, max_depth_)]) {
    return absl::StrCat("<depth ", v.depth, " index ", v.index, ">");
  }
  return absl::StrCat("[", absl::StrJoin(Path(v), ","), "]");
}

TreeFunction Contract(const PartitionTree& tree, const Batch& batch,
                      std::span<const NodeId> nodes) {
  TreeFunction out;
  for (NodeId v : nodes) {
    absl::StatusOr<Box> region = tree.Region(v);
    if (!region.ok()) continue;
    double sum = 0.0;
    for (const Event& e : batch.events) {
      if (region->Contains(e.point)) sum += e.weight;
    }
    out.Set(v, sum);
  }
  return out;
}

bool IsConsistent(const PartitionTree& tree, const TreeFunction& f,
                  std::span<const NodeId> subtree, double tolerance) {
  absl::flat_hash_set<NodeId> members(subtree.begin(), subtree.end());
  for (NodeId v : subtree) {
    const std::vector<NodeId> children = tree.Children(v);
    const bool internal =
        std::any_of(children.begin(), children.end(),
                    [&](NodeId c) { return members.contains(c); });
    if (!internal) continue;
    double sum = 0.0;
    double magnitude = std::max(1.0, std::abs(f.at(v)));
    double abs_sum = 0.0;
    for (NodeId c : children) {
      sum += f.at(c);
      abs_sum += std::abs(f.at(c));
    }
    magnitude = std::max(magnitude, abs_sum);
    if (std::abs(f.at(v) - sum) > tolerance * magnitude) return false;
  }
  return true;
}

double ExtensionWeight(const PartitionTree& tree, NodeId v, NodeId u) {
  if (u.depth < v.depth) {
    return tree.AncestorAt(v, u.depth) == u ? 1.0 : 0.0;
  }
  if (tree.AncestorAt(u, v.depth) != v) return 0.0;
  return std::pow(static_cast<double>(tree.fanout()),
                  -static_cast<double>(u.depth - v.depth));
}

bool IsAntichain(const PartitionTree& tree, std::span<const NodeId> nodes) {
  absl::flat_hash_set<NodeId> members(nodes.begin(), nodes.end());
  for (NodeId v : nodes) {
    for (uint32_t k = 0; k < v.depth; ++k) {
      if (members.contains(tree.AncestorAt(v, k))) return false;
    }
  }
  return true;
}

absl::StatusOr<TreeFunction> Ext(const PartitionTree& tree,
                                 const TreeFunction& d,
                                 std::span<const NodeId> query_nodes) {
  std::vector<NodeId> support;
  for (const auto& [v, x] : d) {
    if (x != 0.0) support.push_back(v);
  }
  if (!IsAntichain(tree, support)) {
    return absl::InvalidArgumentError(
        "Ext requires a function supported on an antichain");
  }
  TreeFunction out;
  for (NodeId u : query_nodes) {
    double g = 0.0;
    for (NodeId v : support) g += d.at(v) * ExtensionWeight(tree, v, u);
    out.Set(u, g);
  }
  return out;
}

}  // namespace dpstream
