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

#ifndef DPSTREAM_EVALUATION_H_
#define DPSTREAM_EVALUATION_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpstream/hierarchy.h"
#include "dpstream/stream.h"

namespace dpstream {

enum class QueryClass { kSmall, kMedium, kLarge };

struct QueryClassSpec {
  int count;
  // Area as a fraction of the domain, in [min_area, max_area).
  double min_area;
  double max_area;
};

QueryClassSpec SpecFor(QueryClass cls);
std::string ToString(QueryClass cls);
absl::StatusOr<QueryClass> ParseQueryClass(absl::string_view name);

// Axis-aligned box with closed lower and open upper edges.
struct RangeQuery {
  std::vector<double> lo;
  std::vector<double> hi;

  bool Contains(std::span<const double> p) const;
  double Volume() const;
};

struct QuerySet {
  QueryClass cls;
  std::vector<RangeQuery> queries;
};

// Area fraction uniform in the class range, aspect ratio log-uniform in
// [1/4, 4] (between the first two dimensions), center uniform and resampled
// until the box lies inside the domain.
QuerySet GenQueries(const Domain& domain, QueryClass cls,
                    std::mt19937_64& rng);

// Brute-force weighted count of the points inside the query.
double RangeCount(const PointSet& points, const RangeQuery& query);

// Exact range counter over a fixed point set. Two-dimensional sets get a
// uniform grid with cell prefix sums; only cells on the query boundary are
// scanned point by point. Other dimensions fall back to the brute force.
class RangeCounter {
 public:
  RangeCounter(const Domain& domain, PointSet points);

  double Count(const RangeQuery& query) const;
  double total() const { return total_; }
  const PointSet& points() const { return points_; }

 private:
  int Cell(double x, int d) const;

  PointSet points_;
  double total_ = 0.0;
  bool gridded_ = false;
  int cells_ = 1;
  double lo_[2] = {0.0, 0.0};
  double inv_width_[2] = {1.0, 1.0};
  std::vector<int> cell_start_;  // CSR offsets, size cells^2 + 1
  std::vector<int> order_;       // point indices grouped by cell
  std::vector<double> prefix_;   // (cells+1)^2 inclusive prefix sums
};

// Mean over the queries of |q(f) - q(g)| / max(q(f), 0.001 * total_true).
// Fails when a denominator is zero.
absl::StatusOr<double> RelativeError(std::span<const double> true_counts,
                                     std::span<const double> synth_counts,
                                     double total_true);
absl::StatusOr<double> RelativeError(const QuerySet& queries,
                                     const RangeCounter& truth,
                                     const RangeCounter& synthetic);

}  // namespace dpstream

#endif  // DPSTREAM_EVALUATION_H_
