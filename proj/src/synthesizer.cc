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

#include "dpstream/synthesizer.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace dpstream {
namespace {

absl::Status CheckNextTime(int64_t current, const Batch& batch) {
  if (batch.time != current + 1) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Time discontinuity: engine at t=", current, " received batch t=",
        batch.time));
  }
  return absl::OkStatus();
}

// Leaf increment for one activation of a counter-backed node.
absl::StatusOr<double> CounterIncrement(
    absl::flat_hash_map<NodeId, Counter>& counters, NodeId v,
    const CounterKind& kind, double epsilon, double x, NoiseSource& noise) {
  auto it = counters.find(v);
  if (it == counters.end()) {
    absl::StatusOr<Counter> counter = Counter::Create(kind, epsilon);
    if (!counter.ok()) return counter.status();
    it = counters.emplace(v, *std::move(counter)).first;
  }
  const double before = it->second.output();
  absl::StatusOr<double> after = it->second.Feed(x, noise);
  if (!after.ok()) return after.status();
  return *after - before;
}

}  // namespace

absl::Status EngineConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be finite and positive, got ", epsilon));
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("theta must be finite and >= 0, got ", theta));
  }
  if (sensitivity < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity must be >= 1, got ", sensitivity));
  }
  return counter.Validate();
}

absl::StatusOr<PrivTreeParams> EngineConfig::SelectionParams() const {
  return PrivTreeParams::Create(effective_epsilon() / 2.0, theta,
                                tree.fanout());
}

absl::StatusOr<std::unique_ptr<NaiveEngine>> NaiveEngine::Create(
    EngineConfig config, Mode mode) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<PrivTreeParams> params = config.SelectionParams();
  if (!params.ok()) return params.status();
  return std::unique_ptr<NaiveEngine>(
      new NaiveEngine(std::move(config), *params, mode));
}

double NaiveEngine::SyntheticCount(NodeId u) const {
  double g = 0.0;
  for (const auto& [v, x] : accumulated_) {
    g += x * ExtensionWeight(config_.tree, v, u);
  }
  return g;
}

absl::StatusOr<StepOutput> NaiveEngine::Step(const Batch& batch,
                                             NoiseSource& noise) {
  if (absl::Status s = CheckNextTime(time_, batch); !s.ok()) return s;
  const PartitionTree& tree = config_.tree;

  auto differential = [&](NodeId v) {
    const NodeId nodes[] = {v};
    return Contract(tree, batch, nodes).at(v);
  };
  StepOutput out;
  out.time = batch.time;
  out.subtree = PrivTree(
      tree, [&](NodeId v) { return SyntheticCount(v) + differential(v); },
      params_, noise);

  TreeFunction increment;
  for (NodeId leaf : out.subtree.leaves) {
    const double grad = differential(leaf);
    if (mode_ == Mode::kLaplace) {
      increment.Set(leaf, grad + noise.Laplace(config_.CountingScale(),
                                               NoisePurpose::kCounting));
    } else {
      absl::StatusOr<double> d =
          CounterIncrement(counters_, leaf, config_.counter,
                           config_.effective_epsilon() / 2.0, grad, noise);
      if (!d.ok()) return d.status();
      increment.Set(leaf, *d);
    }
  }

  absl::StatusOr<TreeFunction> extended =
      Ext(tree, increment, out.subtree.nodes);
  if (!extended.ok()) return extended.status();
  for (NodeId u : out.subtree.nodes) {
    out.node_counts.Set(u, SyntheticCount(u) + extended->at(u));
  }
  for (const auto& [v, x] : increment) accumulated_.Add(v, x);
  for (NodeId leaf : out.subtree.leaves) {
    out.leaf_counts.Set(leaf, out.node_counts.at(leaf));
  }
  time_ = batch.time;
  return out;
}

absl::StatusOr<std::unique_ptr<EfficientEngine>> EfficientEngine::Create(
    EngineConfig config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<PrivTreeParams> params = config.SelectionParams();
  if (!params.ok()) return params.status();
  return std::unique_ptr<EfficientEngine>(
      new EfficientEngine(std::move(config), *params));
}

absl::StatusOr<StepOutput> EfficientEngine::Step(const Batch& batch,
                                                 NoiseSource& noise) {
  if (absl::Status s = CheckNextTime(time_, batch); !s.ok()) return s;
  const PartitionTree& tree = config_.tree;
  const int max_depth = tree.max_depth();
  const uint64_t fanout = static_cast<uint64_t>(tree.fanout());

  // Events keyed by their max-depth cell; every node then owns a contiguous
  // key range and H(v) is a difference of prefix sums.
  std::vector<std::pair<uint64_t, int>> keyed;
  keyed.reserve(batch.events.size());
  for (const Event& e : batch.events) {
    absl::StatusOr<NodeId> cell = tree.LocateLeaf(e.point, max_depth);
    if (!cell.ok()) return cell.status();
    keyed.emplace_back(cell->index, e.weight);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<double> prefix(keyed.size() + 1, 0.0);
  for (size_t i = 0; i < keyed.size(); ++i) {
    prefix[i + 1] = prefix[i] + keyed[i].second;
  }
  auto mass_in = [&](NodeId v) {
    const uint64_t span = tree.Power(max_depth - static_cast<int>(v.depth));
    const uint64_t lo = v.index * span;
    const uint64_t hi = lo + span;
    auto cmp = [](const std::pair<uint64_t, int>& a, uint64_t key) {
      return a.first < key;
    };
    const auto first = std::lower_bound(keyed.begin(), keyed.end(), lo, cmp);
    const auto last = std::lower_bound(first, keyed.end(), hi, cmp);
    return prefix[last - keyed.begin()] - prefix[first - keyed.begin()];
  };

  const bool literal_simple = config_.counter.type == CounterKind::Type::kSimple;
  const double counter_epsilon = config_.effective_epsilon() / 2.0;

  StepOutput out;
  out.time = batch.time;
  std::deque<NodeId> queue{NodeId::Root()};
  std::vector<NodeId> stack;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    out.subtree.nodes.push_back(v);
    const double h = mass_in(v);
    if (v.depth > 0) {
      const NodeId parent = tree.Parent(v);
      ancestor_[v] =
          (Lookup(ancestor_, parent) + Lookup(node_, parent)) / fanout;
    } else {
      ancestor_[v] = 0.0;
    }
    const double noisy =
        BiasedCount(Synthetic(v) + h, v.depth, params_) +
        noise.Laplace(params_.lambda(), NoisePurpose::kSelection);
    if (noisy > params_.theta() && v.depth < static_cast<uint32_t>(max_depth)) {
      for (uint64_t i = 0; i < fanout; ++i) {
        queue.push_back(tree.Child(v, static_cast<int>(i)));
      }
      stack.push_back(v);
      continue;
    }
    if (noisy > params_.theta()) ++out.subtree.capped;
    out.subtree.leaves.push_back(v);
    double increment;
    if (literal_simple) {
      increment = h + noise.Laplace(config_.CountingScale(),
                                    NoisePurpose::kCounting);
    } else {
      absl::StatusOr<double> d = CounterIncrement(
          counters_, v, config_.counter, counter_epsilon, h, noise);
      if (!d.ok()) return d.status();
      increment = *d;
    }
    node_[v] += increment;
  }
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    double below = 0.0;
    for (uint64_t i = 0; i < fanout; ++i) {
      const NodeId w = tree.Child(v, static_cast<int>(i));
      below += Lookup(descendant_, w) + Lookup(node_, w);
    }
    descendant_[v] = below;
  }

  for (NodeId v : out.subtree.nodes) out.node_counts.Set(v, Synthetic(v));
  for (NodeId v : out.subtree.leaves) out.leaf_counts.Set(v, Synthetic(v));
  time_ = batch.time;
  return out;
}

PointSet SamplePoints(const PartitionTree& tree,
                      const TreeFunction& leaf_counts, std::mt19937_64& rng) {
  PointSet out;
  out.dim = tree.domain().dim();
  std::vector<double> p(out.dim);
  for (const auto& [v, g] : leaf_counts) {
    if (!(g > 0.0)) continue;
    absl::StatusOr<Box> box = tree.Region(v);
    if (!box.ok()) continue;
    const auto n = static_cast<int64_t>(std::ceil(g));
    for (int64_t i = 0; i < n; ++i) {
      for (int d = 0; d < out.dim; ++d) {
        const double u = HalfOpenUnitInterval(rng());
        double x = box->lo[d] + (box->hi[d] - box->lo[d]) * u;
        if (x >= box->hi[d] && !box->hi_closed[d]) {
          x = std::nextafter(box->hi[d], box->lo[d]);
        }
        p[d] = x;
      }
      out.Add(p);
    }
  }
  return out;
}

TreeFunction AggregateUp(const PartitionTree& tree, const Subtree& subtree,
                         const TreeFunction& leaf_counts) {
  TreeFunction out;
  for (NodeId v : subtree.leaves) out.Set(v, leaf_counts.at(v));
  for (auto it = subtree.nodes.rbegin(); it != subtree.nodes.rend(); ++it) {
    if (out.contains(*it)) continue;
    double sum = 0.0;
    for (NodeId c : tree.Children(*it)) sum += out.at(c);
    out.Set(*it, sum);
  }
  return out;
}

uint64_t DeriveSeed(uint64_t seed, uint64_t stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream_id),
                    static_cast<uint32_t>(stream_id >> 32)};
  std::array<uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<uint64_t>(words[0]) << 32) | words[1];
}

absl::Status RunSynthesizer(Synthesizer& synthesizer,
                            const PartitionTree& tree,
                            const DiffStream& initialized, uint64_t seed,
                            bool sample, const StepCallback& on_step) {
  SeededNoise noise(DeriveSeed(seed, 0));
  std::mt19937_64 sampler(DeriveSeed(seed, 1));
  for (int64_t t = 1; t <= initialized.horizon(); ++t) {
    absl::StatusOr<StepOutput> out =
        synthesizer.Step(initialized.BatchAt(t), noise);
    if (!out.ok()) return out.status();
    if (sample) out->points = SamplePoints(tree, out->leaf_counts, sampler);
    if (absl::Status s = on_step(*out); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::Status RunStream(const EngineConfig& config, const DiffStream& stream,
                       const RunOptions& options, const StepCallback& on_step) {
  absl::StatusOr<DiffStream> initialized =
      ApplyInitialization(stream, std::max<int64_t>(options.t0, 1));
  if (!initialized.ok()) return initialized.status();
  std::unique_ptr<Synthesizer> synthesizer;
  switch (options.engine) {
    case EngineKind::kEfficient: {
      auto engine = EfficientEngine::Create(config);
      if (!engine.ok()) return engine.status();
      synthesizer = *std::move(engine);
      break;
    }
    case EngineKind::kNaive:
    case EngineKind::kNaiveCounters: {
      auto engine = NaiveEngine::Create(
          config, options.engine == EngineKind::kNaive
                      ? NaiveEngine::Mode::kLaplace
                      : NaiveEngine::Mode::kCounters);
      if (!engine.ok()) return engine.status();
      synthesizer = *std::move(engine);
      break;
    }
  }
  return RunSynthesizer(*synthesizer, config.tree, *initialized, config.seed,
                        options.sample, on_step);
}

absl::StatusOr<std::vector<StepOutput>> RunStream(const EngineConfig& config,
                                                  const DiffStream& stream,
                                                  const RunOptions& options) {
  std::vector<StepOutput> outputs;
  absl::Status s = RunStream(config, stream, options,
                             [&](const StepOutput& out) {
                               outputs.push_back(out);
                               return absl::OkStatus();
                             });
  if (!s.ok()) return s;
  return outputs;
}

}  // namespace dpstream
