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

#include "dpstream/baselines.h"

#include <utility>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"

namespace dpstream {
namespace {

absl::Status CheckNextTime(int64_t current, const Batch& batch) {
  if (batch.time != current + 1) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Time discontinuity: baseline at t=", current, " received batch t=",
        batch.time));
  }
  return absl::OkStatus();
}

PointSet BatchPoints(const Batch& batch, int dim) {
  PointSet out;
  out.dim = dim;
  for (const Event& e : batch.events) out.Add(e.point, e.weight);
  return out;
}

// Counts of `data` on every node of the tree that holds any of it.
absl::StatusOr<absl::flat_hash_map<NodeId, double>> ContractAll(
    const PartitionTree& tree, const PointSet& data) {
  absl::flat_hash_map<NodeId, double> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    absl::StatusOr<NodeId> cell =
        tree.LocateLeaf(data.point(i), tree.max_depth());
    if (!cell.ok()) return cell.status();
    for (int k = 0; k <= tree.max_depth(); ++k) {
      counts[tree.AncestorAt(*cell, k)] += data.weights[i];
    }
  }
  return counts;
}

StepOutput EmptyOutput(int64_t time) {
  StepOutput out;
  out.time = time;
  out.subtree.nodes = {NodeId::Root()};
  out.subtree.leaves = {NodeId::Root()};
  out.leaf_counts.Set(NodeId::Root(), 0.0);
  out.node_counts.Set(NodeId::Root(), 0.0);
  return out;
}

}  // namespace

absl::StatusOr<StepOutput> OfflinePrivTreeCounting(const EngineConfig& config,
                                                   const PointSet& data,
                                                   NoiseSource& noise) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<PrivTreeParams> params = config.SelectionParams();
  if (!params.ok()) return params.status();
  auto counts = ContractAll(config.tree, data);
  if (!counts.ok()) return counts.status();
  auto count = [&](NodeId v) {
    auto it = counts->find(v);
    return it == counts->end() ? 0.0 : it->second;
  };
  StepOutput out;
  out.subtree = PrivTree(config.tree, count, *params, noise);
  for (NodeId leaf : out.subtree.leaves) {
    out.leaf_counts.Set(leaf, count(leaf) + noise.Laplace(
                                                config.CountingScale(),
                                                NoisePurpose::kCounting));
  }
  out.node_counts = AggregateUp(config.tree, out.subtree, out.leaf_counts);
  return out;
}

absl::StatusOr<StepOutput> Baseline1Step(const EngineConfig& config,
                                         int64_t time, const Multiset& snapshot,
                                         NoiseSource& noise) {
  absl::StatusOr<StepOutput> out = OfflinePrivTreeCounting(
      config, ToPointSet(snapshot, config.tree.domain().dim()), noise);
  if (out.ok()) out->time = time;
  return out;
}

absl::StatusOr<StepOutput> Baseline2Step(const EngineConfig& config,
                                         const Batch& batch, double total_true,
                                         NoiseSource& noise) {
  const double batch_mass = NablaNorm(batch);
  if (batch_mass == 0.0) return EmptyOutput(batch.time);
  absl::StatusOr<StepOutput> out = OfflinePrivTreeCounting(
      config, BatchPoints(batch, config.tree.domain().dim()), noise);
  if (!out.ok()) return out.status();
  out->time = batch.time;
  const double scale = total_true / batch_mass;
  TreeFunction leaf_counts, node_counts;
  for (const auto& [v, g] : out->leaf_counts) leaf_counts.Set(v, g * scale);
  for (const auto& [v, g] : out->node_counts) node_counts.Set(v, g * scale);
  out->leaf_counts = std::move(leaf_counts);
  out->node_counts = std::move(node_counts);
  return out;
}

absl::StatusOr<StepOutput> Baseline1::Step(const Batch& batch,
                                           NoiseSource& noise) {
  if (absl::Status s = CheckNextTime(time_, batch); !s.ok()) return s;
  if (absl::Status s = data_.Apply(batch); !s.ok()) return s;
  absl::StatusOr<StepOutput> out =
      Baseline1Step(config_, batch.time, data_.counts(), noise);
  if (out.ok()) time_ = batch.time;
  return out;
}

absl::StatusOr<StepOutput> Baseline2::Step(const Batch& batch,
                                           NoiseSource& noise) {
  if (absl::Status s = CheckNextTime(time_, batch); !s.ok()) return s;
  if (absl::Status s = data_.Apply(batch); !s.ok()) return s;
  absl::StatusOr<StepOutput> out = Baseline2Step(
      config_, batch, static_cast<double>(data_.total()), noise);
  if (out.ok()) time_ = batch.time;
  return out;
}

absl::StatusOr<std::unique_ptr<Baseline3>> Baseline3::Create(
    EngineConfig config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return std::unique_ptr<Baseline3>(new Baseline3(std::move(config)));
}

absl::StatusOr<StepOutput> Baseline3::Step(const Batch& batch,
                                           NoiseSource& noise) {
  if (absl::Status s = CheckNextTime(time_, batch); !s.ok()) return s;
  const PartitionTree& tree = config_.tree;
  if (time_ == 0) {
    absl::StatusOr<StepOutput> out = OfflinePrivTreeCounting(
        config_, BatchPoints(batch, tree.domain().dim()), noise);
    if (!out.ok()) return out.status();
    out->time = batch.time;
    frozen_ = out->subtree;
    initial_ = out->leaf_counts;
    time_ = batch.time;
    return out;
  }

  absl::flat_hash_set<NodeId> leaves(frozen_.leaves.begin(),
                                     frozen_.leaves.end());
  absl::flat_hash_map<NodeId, double> differential;
  for (const Event& e : batch.events) {
    absl::StatusOr<NodeId> cell = tree.LocateLeaf(e.point, tree.max_depth());
    if (!cell.ok()) return cell.status();
    NodeId v = *cell;
    while (!leaves.contains(v)) v = tree.Parent(v);
    differential[v] += e.weight;
  }
  StepOutput out;
  out.time = batch.time;
  out.subtree = frozen_;
  out.subtree.capped = 0;
  for (NodeId leaf : frozen_.leaves) {
    auto it = counters_.find(leaf);
    if (it == counters_.end()) {
      absl::StatusOr<Counter> counter =
          Counter::Create(config_.counter, config_.effective_epsilon());
      if (!counter.ok()) return counter.status();
      it = counters_.emplace(leaf, *std::move(counter)).first;
    }
    const double x =
        differential.contains(leaf) ? differential.at(leaf) : 0.0;
    absl::StatusOr<double> running = it->second.Feed(x, noise);
    if (!running.ok()) return running.status();
    out.leaf_counts.Set(leaf, initial_.at(leaf) + *running);
  }
  out.node_counts = AggregateUp(tree, out.subtree, out.leaf_counts);
  time_ = batch.time;
  return out;
}

absl::Status RunBaseline(BaselineKind kind, const EngineConfig& config,
                         const DiffStream& stream, int64_t t0, bool sample,
                         const StepCallback& on_step) {
  if (kind == BaselineKind::kInitThenCount && t0 < 1) {
    return absl::InvalidArgumentError(
        "Baseline 3 needs an initialization time t0 > 0");
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<DiffStream> initialized =
      ApplyInitialization(stream, std::max<int64_t>(t0, 1));
  if (!initialized.ok()) return initialized.status();
  std::unique_ptr<Synthesizer> synthesizer;
  switch (kind) {
    case BaselineKind::kOfflineOnStream:
      synthesizer = std::make_unique<Baseline1>(config);
      break;
    case BaselineKind::kOfflineOnDiff:
      synthesizer = std::make_unique<Baseline2>(config);
      break;
    case BaselineKind::kInitThenCount: {
      auto b3 = Baseline3::Create(config);
      if (!b3.ok()) return b3.status();
      synthesizer = *std::move(b3);
      break;
    }
  }
  return RunSynthesizer(*synthesizer, config.tree, *initialized, config.seed,
                        sample, on_step);
}

}  // namespace dpstream
