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

#ifndef DPSTREAM_TESTS_TESTING_FIXTURES_H_
#define DPSTREAM_TESTS_TESTING_FIXTURES_H_

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "dpstream/hierarchy.h"
#include "dpstream/privtree.h"
#include "dpstream/stream.h"

namespace dpstream::testing {

struct RandomStreamOptions {
  int64_t horizon = 20;
  int max_events_per_step = 500;
  // Chance that an event deletes a live point instead of adding one.
  double deletion_rate = 0.3;
  // Chance that a step is left empty.
  double empty_rate = 0.1;
  int clusters = 4;
  double cluster_spread = 0.05;
};

// Clustered 2-d turnstile stream that is prefix-positive by construction.
DiffStream RandomStream(std::mt19937_64& rng,
                        const RandomStreamOptions& options);

// Noise-free PrivTree written as a plain recursion, used as an oracle.
std::set<NodeId> ReferencePrivTree(const PartitionTree& tree,
                                   const NodeCount& count, double theta,
                                   double delta);

// Random node values on every node of the tree up to `depth`.
TreeFunction RandomNodeValues(const PartitionTree& tree, int depth,
                              double max_value, std::mt19937_64& rng);

}  // namespace dpstream::testing

#endif  // DPSTREAM_TESTS_TESTING_FIXTURES_H_
