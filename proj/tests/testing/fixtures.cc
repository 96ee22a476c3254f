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

#include "testing/fixtures.h"

#include <algorithm>

namespace dpstream::testing {

DiffStream RandomStream(std::mt19937_64& rng,
                        const RandomStreamOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, options.cluster_spread);
  std::vector<Point> centers;
  for (int c = 0; c < options.clusters; ++c) {
    centers.push_back({unit(rng), unit(rng)});
  }
  std::vector<Point> live;
  std::vector<Batch> batches;
  for (int64_t t = 1; t <= options.horizon; ++t) {
    Batch batch{.time = t, .events = {}};
    if (unit(rng) < options.empty_rate) {
      batches.push_back(std::move(batch));
      continue;
    }
    std::uniform_int_distribution<int> size(0, options.max_events_per_step);
    const int n = size(rng);
    std::vector<Point> added;
    for (int i = 0; i < n; ++i) {
      if (!live.empty() && unit(rng) < options.deletion_rate) {
        std::uniform_int_distribution<size_t> pick(0, live.size() - 1);
        const size_t j = pick(rng);
        batch.events.push_back({live[j], -1});
        live[j] = live.back();
        live.pop_back();
        continue;
      }
      Point p;
      if (unit(rng) < 0.1) {
        p = {unit(rng), unit(rng)};
      } else {
        std::uniform_int_distribution<int> pick(0, options.clusters - 1);
        const Point& c = centers[pick(rng)];
        p = {std::clamp(c[0] + normal(rng), 0.0, 1.0),
             std::clamp(c[1] + normal(rng), 0.0, 1.0)};
      }
      batch.events.push_back({p, +1});
      added.push_back(std::move(p));
    }
    // Points added this step can only be deleted from the next step on.
    live.insert(live.end(), added.begin(), added.end());
    batches.push_back(std::move(batch));
  }
  return *DiffStream::Create(std::move(batches));
}

namespace {

void Expand(const PartitionTree& tree, const NodeCount& count, double theta,
            double delta, NodeId v, std::set<NodeId>& out) {
  out.insert(v);
  const double biased =
      std::max(count(v) - v.depth * delta, theta - delta);
  if (biased > theta && static_cast<int>(v.depth) < tree.max_depth()) {
    for (int i = 0; i < tree.fanout(); ++i) {
      Expand(tree, count, theta, delta, tree.Child(v, i), out);
    }
  }
}

}  // namespace

std::set<NodeId> ReferencePrivTree(const PartitionTree& tree,
                                   const NodeCount& count, double theta,
                                   double delta) {
  std::set<NodeId> out;
  Expand(tree, count, theta, delta, NodeId::Root(), out);
  return out;
}

TreeFunction RandomNodeValues(const PartitionTree& tree, int depth,
                              double max_value, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.0, max_value);
  TreeFunction f;
  for (int d = 0; d <= depth; ++d) {
    for (uint64_t i = 0; i < tree.Power(d); ++i) {
      f.Set(NodeId{static_cast<uint32_t>(d), i}, value(rng));
    }
  }
  return f;
}

}  // namespace dpstream::testing
