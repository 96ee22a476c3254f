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

#ifndef DPSTREAM_BASELINES_H_
#define DPSTREAM_BASELINES_H_

#include <memory>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "dpstream/counters.h"
#include "dpstream/synthesizer.h"

namespace dpstream {

enum class BaselineKind {
  kOfflineOnStream,  // Baseline 1
  kOfflineOnDiff,    // Baseline 2
  kInitThenCount,    // Baseline 3
};

// Offline PrivTree at eps/2 on the contraction of `data`, then one
// Laplace(2/eps) per leaf. Internal node counts are sums of the leaves.
absl::StatusOr<StepOutput> OfflinePrivTreeCounting(const EngineConfig& config,
                                                   const PointSet& data,
                                                   NoiseSource& noise);

// Offline method rerun on the full snapshot f(., t). Not eps-DP over the
// horizon: every step spends a fresh eps on the same data.
absl::StatusOr<StepOutput> Baseline1Step(const EngineConfig& config,
                                         int64_t time, const Multiset& snapshot,
                                         NoiseSource& noise);

// Offline method on the differential batch only, rescaled by
// total_true / |batch|. An empty batch yields an empty output.
absl::StatusOr<StepOutput> Baseline2Step(const EngineConfig& config,
                                         const Batch& batch, double total_true,
                                         NoiseSource& noise);

class Baseline1 : public Synthesizer {
 public:
  explicit Baseline1(EngineConfig config) : config_(std::move(config)) {}
  absl::StatusOr<StepOutput> Step(const Batch& batch,
                                  NoiseSource& noise) override;
  int64_t time() const override { return time_; }

 private:
  EngineConfig config_;
  SnapshotTracker data_;
  int64_t time_ = 0;
};

class Baseline2 : public Synthesizer {
 public:
  explicit Baseline2(EngineConfig config) : config_(std::move(config)) {}
  absl::StatusOr<StepOutput> Step(const Batch& batch,
                                  NoiseSource& noise) override;
  int64_t time() const override { return time_; }

 private:
  EngineConfig config_;
  SnapshotTracker data_;
  int64_t time_ = 0;
};

// Runs the offline method once on the first (initialization) batch and
// freezes its subtree; afterwards each frozen leaf carries a counter with
// the full budget, fed with the leaf-contracted batches.
class Baseline3 : public Synthesizer {
 public:
  static absl::StatusOr<std::unique_ptr<Baseline3>> Create(
      EngineConfig config);

  absl::StatusOr<StepOutput> Step(const Batch& batch,
                                  NoiseSource& noise) override;
  int64_t time() const override { return time_; }
  const Subtree& frozen() const { return frozen_; }

 private:
  explicit Baseline3(EngineConfig config) : config_(std::move(config)) {}

  EngineConfig config_;
  int64_t time_ = 0;
  Subtree frozen_;
  TreeFunction initial_;
  absl::flat_hash_map<NodeId, Counter> counters_;
};

// Runs a baseline end to end with the same seeding as RunStream. Baseline 3
// requires t0 >= 1 in the caller's terms; here t0 < 1 is rejected.
absl::Status RunBaseline(BaselineKind kind, const EngineConfig& config,
                         const DiffStream& stream, int64_t t0, bool sample,
                         const StepCallback& on_step);

}  // namespace dpstream

#endif  // DPSTREAM_BASELINES_H_
