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

#ifndef DPSTREAM_SYNTHESIZER_H_
#define DPSTREAM_SYNTHESIZER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "dpstream/counters.h"
#include "dpstream/hierarchy.h"
#include "dpstream/noise.h"
#include "dpstream/privtree.h"
#include "dpstream/stream.h"

namespace dpstream {

struct EngineConfig {
  PartitionTree tree;
  // Per-step budget before dividing by the sensitivity.
  double epsilon = 0.5;
  double theta = 0.0;
  CounterKind counter = CounterKind::Simple();
  int sensitivity = 1;
  uint64_t seed = 0;

  absl::Status Validate() const;
  // Budget the engine actually runs at: epsilon / sensitivity. Half goes to
  // PrivTree, half to counting.
  double effective_epsilon() const { return epsilon / sensitivity; }
  absl::StatusOr<PrivTreeParams> SelectionParams() const;
  // Laplace scale of one leaf count: 2 / effective_epsilon.
  double CountingScale() const { return 2.0 / effective_epsilon(); }
};

struct StepOutput {
  int64_t time = 0;
  Subtree subtree;
  // Synthetic count G(v, t) on the leaves of the subtree.
  TreeFunction leaf_counts;
  // G(v, t) on every node of the subtree.
  TreeFunction node_counts;
  PointSet points;
};

// One step-at-a-time synthesizer over a differential stream.
class Synthesizer {
 public:
  virtual ~Synthesizer() = default;
  // `batch.time` must be exactly time() + 1. Points are not sampled here.
  virtual absl::StatusOr<StepOutput> Step(const Batch& batch,
                                          NoiseSource& noise) = 0;
  virtual int64_t time() const = 0;
};

// Reference engine that evaluates the synthetic function G from the
// accumulated leaf increments through the extension weights. With
// Mode::kLaplace each leaf gets one fresh Laplace(2/eps) per activation;
// with Mode::kCounters each leaf owns a lazily created counter at eps/2 and
// the increment is the change of that counter's output.
class NaiveEngine : public Synthesizer {
 public:
  enum class Mode { kLaplace, kCounters };

  static absl::StatusOr<std::unique_ptr<NaiveEngine>> Create(
      EngineConfig config, Mode mode);

  absl::StatusOr<StepOutput> Step(const Batch& batch,
                                  NoiseSource& noise) override;
  int64_t time() const override { return time_; }

  // G(u, time()).
  double SyntheticCount(NodeId u) const;
  const absl::flat_hash_map<NodeId, Counter>& counters() const {
    return counters_;
  }

 private:
  NaiveEngine(EngineConfig config, PrivTreeParams params, Mode mode)
      : config_(std::move(config)), params_(params), mode_(mode) {}

  EngineConfig config_;
  PrivTreeParams params_;
  Mode mode_;
  int64_t time_ = 0;
  // Sum over past steps of the leaf increments d(v, t).
  TreeFunction accumulated_;
  absl::flat_hash_map<NodeId, Counter> counters_;
};

// Engine that touches only the nodes PrivTree visits. The synthetic count of
// a visited node is C_a + C_n + C_d: mass pushed down from ancestors, the
// node's own accumulated leaf increments, and mass pushed up from
// descendants.
class EfficientEngine : public Synthesizer {
 public:
  static absl::StatusOr<std::unique_ptr<EfficientEngine>> Create(
      EngineConfig config);

  absl::StatusOr<StepOutput> Step(const Batch& batch,
                                  NoiseSource& noise) override;
  int64_t time() const override { return time_; }

  const absl::flat_hash_map<NodeId, double>& ancestor_mass() const {
    return ancestor_;
  }
  const absl::flat_hash_map<NodeId, double>& node_mass() const {
    return node_;
  }
  const absl::flat_hash_map<NodeId, double>& descendant_mass() const {
    return descendant_;
  }

 private:
  EfficientEngine(EngineConfig config, PrivTreeParams params)
      : config_(std::move(config)), params_(params) {}

  static double Lookup(const absl::flat_hash_map<NodeId, double>& map,
                       NodeId v) {
    auto it = map.find(v);
    return it == map.end() ? 0.0 : it->second;
  }
  double Synthetic(NodeId v) const {
    return Lookup(ancestor_, v) + Lookup(node_, v) + Lookup(descendant_, v);
  }

  EngineConfig config_;
  PrivTreeParams params_;
  int64_t time_ = 0;
  absl::flat_hash_map<NodeId, double> ancestor_;
  absl::flat_hash_map<NodeId, double> node_;
  absl::flat_hash_map<NodeId, double> descendant_;
  absl::flat_hash_map<NodeId, Counter> counters_;
};

// For every leaf with G(v) > 0 emits ceil(G(v)) i.i.d. uniform points in
// the leaf's region, in leaf order. Non-positive counts emit nothing.
PointSet SamplePoints(const PartitionTree& tree,
                      const TreeFunction& leaf_counts, std::mt19937_64& rng);

// Internal node counts as sums of the leaf counts below them.
TreeFunction AggregateUp(const PartitionTree& tree, const Subtree& subtree,
                         const TreeFunction& leaf_counts);

enum class EngineKind { kEfficient, kNaive, kNaiveCounters };

struct RunOptions {
  EngineKind engine = EngineKind::kEfficient;
  // Batches with time <= t0 are merged into the first step.
  int64_t t0 = 1;
  bool sample = true;
};

using StepCallback = std::function<absl::Status(const StepOutput&)>;

// Drives a synthesizer over every time step 1..horizon of the initialized
// stream, seeding noise and sampling from config.seed.
absl::Status RunSynthesizer(Synthesizer& synthesizer,
                            const PartitionTree& tree,
                            const DiffStream& initialized, uint64_t seed,
                            bool sample, const StepCallback& on_step);

absl::Status RunStream(const EngineConfig& config, const DiffStream& stream,
                       const RunOptions& options, const StepCallback& on_step);
absl::StatusOr<std::vector<StepOutput>> RunStream(const EngineConfig& config,
                                                  const DiffStream& stream,
                                                  const RunOptions& options);

// Deterministic sub-seeds for the noise and sampling generators.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream_id);

}  // namespace dpstream

#endif  // DPSTREAM_SYNTHESIZER_H_
