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

#include "dpstream/counters.h"

#include <bit>
#include <charconv>
#include <cmath>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"

namespace dpstream {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int BitWidth(int64_t horizon) {
  return static_cast<int>(std::bit_width(static_cast<uint64_t>(horizon)));
}

}  // namespace

absl::StatusOr<CounterKind> CounterKind::Parse(absl::string_view text) {
  const std::string lower = absl::AsciiStrToLower(text);
  absl::string_view name = lower;
  absl::string_view arg;
  if (auto colon = name.find(':'); colon != absl::string_view::npos) {
    arg = name.substr(colon + 1);
    name = name.substr(0, colon);
  }
  auto parse_arg = [&](int64_t& out) -> absl::Status {
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), out);
    if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("Bad counter parameter in '", text, "'"));
    }
    return absl::OkStatus();
  };
  CounterKind kind;
  if (name == "simple" && arg.empty()) {
    kind = Simple();
  } else if (name == "block") {
    int64_t b = 0;
    if (absl::Status s = parse_arg(b); !s.ok()) return s;
    kind = Block(b);
  } else if (name == "binarytree") {
    int64_t horizon = 0;
    if (absl::Status s = parse_arg(horizon); !s.ok()) return s;
    kind = BinaryTree(horizon);
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "Unknown counter '", text,
        "'; expected simple, block:B or binarytree:T"));
  }
  if (absl::Status s = kind.Validate(); !s.ok()) return s;
  return kind;
}

std::string CounterKind::ToString() const {
  switch (type) {
    case Type::kSimple:
      return "simple";
    case Type::kBlock:
      return absl::StrCat("block:", param);
    case Type::kBinaryTree:
      return absl::StrCat("binarytree:", param);
  }
  return "unknown";
}

absl::Status CounterKind::Validate() const {
  if (type == Type::kBlock && param < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Block size must be >= 1, got ", param));
  }
  if (type == Type::kBinaryTree && param < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Binary-tree horizon must be >= 1, got ", param));
  }
  return absl::OkStatus();
}

double BinaryTreeNoiseScale(int64_t horizon, double epsilon) {
  return std::max(1.0, std::log2(static_cast<double>(horizon))) / epsilon;
}

Counter::State Counter::InitialState(CounterKind kind) {
  switch (kind.type) {
    case CounterKind::Type::kBlock:
      return BlockState{};
    case CounterKind::Type::kBinaryTree: {
      const int width = BitWidth(kind.param);
      return BinaryTreeState{std::vector<double>(width, 0.0),
                             std::vector<double>(width, 0.0)};
    }
    case CounterKind::Type::kSimple:
      break;
  }
  return SimpleState{};
}

Counter::Counter(CounterKind kind, double epsilon)
    : kind_(kind), epsilon_(epsilon), state_(InitialState(kind)) {}

absl::StatusOr<Counter> Counter::Create(CounterKind kind, double epsilon) {
  if (absl::Status s = kind.Validate(); !s.ok()) return s;
  if (!(epsilon > 0.0) || std::isnan(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Counter epsilon must be positive, got ", epsilon));
  }
  return Counter(kind, epsilon);
}

absl::StatusOr<double> Counter::Feed(double x, NoiseSource& noise) {
  if (kind_.type == CounterKind::Type::kBinaryTree && time_ >= kind_.param) {
    return absl::OutOfRangeError(absl::StrCat(
        "Binary-tree counter horizon ", kind_.param, " exhausted"));
  }
  const int64_t t = ++time_;
  output_ = std::visit(
      Overloaded{
          [&](SimpleState& s) {
            s.g += x + noise.Laplace(1.0 / epsilon_, NoisePurpose::kCounting);
            return s.g;
          },
          [&](BlockState& s) {
            const double scale = 2.0 / epsilon_;
            s.beta += x;
            if (t % kind_.param == 0) {
              s.alpha = 0.0;
              s.beta += noise.Laplace(scale, NoisePurpose::kCounting);
              s.beta_lastblock = s.beta;
            } else {
              s.alpha += x + noise.Laplace(scale, NoisePurpose::kCounting);
            }
            return s.beta_lastblock + s.alpha;
          },
          [&](BinaryTreeState& s) {
            const int j = std::countr_zero(static_cast<uint64_t>(t));
            double partial = x;
            for (int i = 0; i < j; ++i) partial += s.alpha[i];
            s.alpha[j] = partial;
            s.alpha_hat[j] =
                partial + noise.Laplace(BinaryTreeNoiseScale(kind_.param,
                                                             epsilon_),
                                        NoisePurpose::kCounting);
            for (int i = 0; i < j; ++i) s.alpha[i] = s.alpha_hat[i] = 0.0;
            double g = 0.0;
            for (int i = 0; i < static_cast<int>(s.alpha_hat.size()); ++i) {
              if ((t >> i) & 1) g += s.alpha_hat[i];
            }
            return g;
          },
      },
      state_);
  return output_;
}

double CounterErrorStd(const CounterKind& kind, double epsilon, int64_t t) {
  switch (kind.type) {
    case CounterKind::Type::kSimple:
      return std::sqrt(2.0 * static_cast<double>(t)) / epsilon;
    case CounterKind::Type::kBlock: {
      const int64_t k = t / kind.param;
      const int64_t r = t % kind.param;
      return std::sqrt(8.0 * static_cast<double>(k + r)) / epsilon;
    }
    case CounterKind::Type::kBinaryTree: {
      const int ones = std::popcount(static_cast<uint64_t>(t));
      return std::sqrt(2.0 * ones) * BinaryTreeNoiseScale(kind.param, epsilon);
    }
  }
  return 0.0;
}

absl::StatusOr<std::vector<double>> MultiCounterFeed(
    std::span<Counter> counters, std::span<const double> xs,
    NoiseSource& noise) {
  if (counters.size() != xs.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("MultiCounterFeed got ", counters.size(),
                     " counters but ", xs.size(), " inputs"));
  }
  std::vector<double> out;
  out.reserve(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    absl::StatusOr<double> g = counters[i].Feed(xs[i], noise);
    if (!g.ok()) return g.status();
    out.push_back(*g);
  }
  return out;
}

absl::StatusOr<SelectiveCounter::Output> SelectiveCounter::Step(
    const Selector& selector, double x, NoiseSource& noise) {
  const int l = selector(x, history_);
  if (l < 0 || l >= static_cast<int>(counters_.size())) {
    return absl::OutOfRangeError(absl::StrCat(
        "Selector returned ", l, " outside [0, ", counters_.size(), ")"));
  }
  absl::StatusOr<double> value = counters_[l].Feed(x, noise);
  if (!value.ok()) return value.status();
  ++time_;
  selected_times_[l].push_back(time_);
  history_.push_back(Output{l, *value});
  return history_.back();
}

}  // namespace dpstream
