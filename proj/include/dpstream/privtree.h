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

#ifndef DPSTREAM_PRIVTREE_H_
#define DPSTREAM_PRIVTREE_H_

#include <functional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpstream/hierarchy.h"
#include "dpstream/noise.h"

namespace dpstream {

// Parameters of the private subtree selection. The noise scale and the
// per-level depth bias are derived from the budget and the fanout:
//   lambda = (2 fanout - 1) / (fanout - 1) * 2 / epsilon
//   delta  = lambda * ln(fanout)
class PrivTreeParams {
 public:
  static absl::StatusOr<PrivTreeParams> Create(double epsilon, double theta,
                                               int fanout);

  double epsilon() const { return epsilon_; }
  double theta() const { return theta_; }
  int fanout() const { return fanout_; }
  double lambda() const { return lambda_; }
  double delta() const { return delta_; }

 private:
  PrivTreeParams(double epsilon, double theta, int fanout, double lambda,
                 double delta)
      : epsilon_(epsilon),
        theta_(theta),
        fanout_(fanout),
        lambda_(lambda),
        delta_(delta) {}

  double epsilon_;
  double theta_;
  int fanout_;
  double lambda_;
  double delta_;
};

// Parent-closed subtree of the partition tree. `nodes` and `leaves` are in
// breadth-first visit order; every non-leaf has all of its children.
struct Subtree {
  std::vector<NodeId> nodes;
  std::vector<NodeId> leaves;
  // Nodes whose noisy count passed the threshold but sat at max_depth.
  int capped = 0;
};

using NodeCount = std::function<double(NodeId)>;

// Breadth-first private subtree selection. A node is expanded iff its
// clamped, depth-biased, noisy count exceeds theta strictly and it sits
// above max_depth. Draws one selection-noise sample per visited node.
Subtree PrivTree(const PartitionTree& tree, const NodeCount& count,
                 const PrivTreeParams& params, NoiseSource& noise);

// Biased count before noise: max(count - depth * delta, theta - delta).
double BiasedCount(double count, uint32_t depth, const PrivTreeParams& params);

// P{Laplace(0, lambda) > z}.
double LaplaceSurvival(double z, double lambda);

// ln(P{x + Lap(lambda) > theta} / P{x - 1 + Lap(lambda) > theta}).
double Rho(double x, double lambda, double theta);

// Upper envelope of Rho: 1/lambda below theta + 1, decaying as
// exp((theta + 1 - x) / lambda) / lambda above it.
double RhoTop(double x, double lambda, double theta);

}  // namespace dpstream

#endif  // DPSTREAM_PRIVTREE_H_
