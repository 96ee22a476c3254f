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

#include "dpstream/privtree.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include "absl/strings/str_cat.h"

namespace dpstream {

absl::StatusOr<PrivTreeParams> PrivTreeParams::Create(double epsilon,
                                                      double theta,
                                                      int fanout) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("PrivTree epsilon must be finite and positive, got ",
                     epsilon));
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("PrivTree theta must be finite and >= 0, got ", theta));
  }
  if (fanout < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("Fanout must be >= 2, got ", fanout));
  }
  const double b = fanout;
  const double lambda = (2.0 * b - 1.0) / (b - 1.0) * 2.0 / epsilon;
  const double delta = lambda * std::log(b);
  return PrivTreeParams(epsilon, theta, fanout, lambda, delta);
}

double BiasedCount(double count, uint32_t depth,
                   const PrivTreeParams& params) {
  const double biased = count - static_cast<double>(depth) * params.delta();
  return std::max(biased, params.theta() - params.delta());
}

Subtree PrivTree(const PartitionTree& tree, const NodeCount& count,
                 const PrivTreeParams& params, NoiseSource& noise) {
  Subtree out;
  std::deque<NodeId> unvisited{NodeId::Root()};
  const auto max_depth = static_cast<uint32_t>(tree.max_depth());
  while (!unvisited.empty()) {
    const NodeId v = unvisited.front();
    unvisited.pop_front();
    out.nodes.push_back(v);
    const double noisy = BiasedCount(count(v), v.depth, params) +
                         noise.Laplace(params.lambda(), NoisePurpose::kSelection);
    if (noisy > params.theta() && v.depth < max_depth) {
      for (int i = 0; i < tree.fanout(); ++i) {
        unvisited.push_back(tree.Child(v, i));
      }
    } else {
      if (noisy > params.theta()) ++out.capped;
      out.leaves.push_back(v);
    }
  }
  return out;
}

double LaplaceSurvival(double z, double lambda) {
  if (z >= 0.0) return 0.5 * std::exp(-z / lambda);
  return 1.0 - 0.5 * std::exp(z / lambda);
}

double Rho(double x, double lambda, double theta) {
  // Both terms are survival probabilities; for large x they approach 1 and
  // the log1p form keeps the ratio accurate.
  const double z_hi = theta - x;
  const double z_lo = theta - x + 1.0;
  if (z_lo < 0.0) {
    return std::log1p(-0.5 * std::exp(z_hi / lambda)) -
           std::log1p(-0.5 * std::exp(z_lo / lambda));
  }
  return std::log(LaplaceSurvival(z_hi, lambda)) -
         std::log(LaplaceSurvival(z_lo, lambda));
}

double RhoTop(double x, double lambda, double theta) {
  if (x < theta + 1.0) return 1.0 / lambda;
  return std::exp((theta + 1.0 - x) / lambda) / lambda;
}

}  // namespace dpstream
