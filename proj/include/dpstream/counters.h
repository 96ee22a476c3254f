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

#ifndef DPSTREAM_COUNTERS_H_
#define DPSTREAM_COUNTERS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpstream/noise.h"

namespace dpstream {

// Continual-observation counter flavours. `param` is the block size for
// kBlock and the time horizon for kBinaryTree; unused for kSimple.
struct CounterKind {
  enum class Type { kSimple, kBlock, kBinaryTree };

  Type type = Type::kSimple;
  int64_t param = 0;

  static CounterKind Simple() { return {Type::kSimple, 0}; }
  static CounterKind Block(int64_t block_size) {
    return {Type::kBlock, block_size};
  }
  static CounterKind BinaryTree(int64_t horizon) {
    return {Type::kBinaryTree, horizon};
  }

  // "simple", "block:B" or "binarytree:T".
  static absl::StatusOr<CounterKind> Parse(absl::string_view text);
  std::string ToString() const;
  absl::Status Validate() const;

  friend bool operator==(const CounterKind&, const CounterKind&) = default;
};

// Per-draw Laplace scale of the binary-tree counter: max(1, log2 T) / eps.
double BinaryTreeNoiseScale(int64_t horizon, double epsilon);

// Streaming DP estimate of a running sum. Every Feed advances the internal
// time by one and spends exactly one counting-noise draw.
class Counter {
 public:
  static absl::StatusOr<Counter> Create(CounterKind kind, double epsilon);

  absl::StatusOr<double> Feed(double x, NoiseSource& noise);

  const CounterKind& kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  int64_t time() const { return time_; }
  // Most recent output, 0 before the first feed.
  double output() const { return output_; }

 private:
  struct SimpleState {
    double g = 0.0;
  };
  struct BlockState {
    double alpha = 0.0;
    double beta = 0.0;
    double beta_lastblock = 0.0;
  };
  struct BinaryTreeState {
    std::vector<double> alpha;
    std::vector<double> alpha_hat;
  };

  using State = std::variant<SimpleState, BlockState, BinaryTreeState>;

  Counter(CounterKind kind, double epsilon);
  static State InitialState(CounterKind kind);

  CounterKind kind_;
  double epsilon_;
  int64_t time_ = 0;
  double output_ = 0.0;
  State state_;
};

// Analytic standard deviation of a counter's error after t feeds.
//   Simple:     sqrt(2 t) / eps
//   Block(B):   sqrt(8 (k + r)) / eps, t = k B + r
//   BinaryTree: sqrt(2 popcount(t)) * max(1, log2 T) / eps
double CounterErrorStd(const CounterKind& kind, double epsilon, int64_t t);

// Feeds xs[i] to counters[i] with independent noise.
absl::StatusOr<std::vector<double>> MultiCounterFeed(
    std::span<Counter> counters, std::span<const double> xs,
    NoiseSource& noise);

// Online selective counting: each step a selector picks exactly one counter
// and only that counter consumes the input.
class SelectiveCounter {
 public:
  struct Output {
    int index;
    double value;
  };
  // Selector sees the new input and the outputs so far; returns an index in
  // [0, k).
  using Selector =
      std::function<int(double x, std::span<const Output> history)>;

  explicit SelectiveCounter(std::vector<Counter> counters)
      : counters_(std::move(counters)), selected_times_(counters_.size()) {}

  absl::StatusOr<Output> Step(const Selector& selector, double x,
                              NoiseSource& noise);

  const std::vector<Counter>& counters() const { return counters_; }
  // Times at which counter l was selected.
  const std::vector<int64_t>& selected_times(int l) const {
    return selected_times_[l];
  }
  std::span<const Output> history() const { return history_; }
  int64_t time() const { return time_; }

 private:
  std::vector<Counter> counters_;
  std::vector<std::vector<int64_t>> selected_times_;
  std::vector<Output> history_;
  int64_t time_ = 0;
};

}  // namespace dpstream

#endif  // DPSTREAM_COUNTERS_H_
