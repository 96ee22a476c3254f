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

#ifndef DPSTREAM_STREAM_H_
#define DPSTREAM_STREAM_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpstream {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Bounded product domain. Every interval is closed.
class Domain {
 public:
  static absl::StatusOr<Domain> Create(std::vector<Interval> bounds);
  static Domain UnitCube(int dim);

  int dim() const { return static_cast<int>(bounds_.size()); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Interval& bound(int d) const { return bounds_[d]; }
  bool Contains(std::span<const double> p) const;
  double Volume() const;

 private:
  explicit Domain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {}
  std::vector<Interval> bounds_;
};

// Multiset of points with positive multiplicities.
using Multiset = std::map<Point, int64_t>;

// A unit addition (+1) or deletion (-1) of a point.
struct Event {
  Point point;
  int weight = 1;
};

struct Batch {
  int64_t time = 1;
  std::vector<Event> events;
};

// Time-ordered batches with strictly increasing times. Missing times are
// implicitly empty.
class DiffStream {
 public:
  DiffStream() = default;
  static absl::StatusOr<DiffStream> Create(std::vector<Batch> batches);

  const std::vector<Batch>& batches() const { return batches_; }
  bool empty() const { return batches_.empty(); }
  // Last time index carrying a batch, 0 for an empty stream.
  int64_t horizon() const {
    return batches_.empty() ? 0 : batches_.back().time;
  }
  // The batch at `time`, or an empty batch stamped with `time`.
  Batch BatchAt(int64_t time) const;

 private:
  explicit DiffStream(std::vector<Batch> batches)
      : batches_(std::move(batches)) {}
  std::vector<Batch> batches_;
};

// Flat list of weighted points of one dimension.
struct PointSet {
  int dim = 2;
  std::vector<double> coords;
  std::vector<double> weights;

  size_t size() const { return weights.size(); }
  std::span<const double> point(size_t i) const {
    return {coords.data() + i * dim, static_cast<size_t>(dim)};
  }
  void Add(std::span<const double> p, double weight = 1.0) {
    coords.insert(coords.end(), p.begin(), p.end());
    weights.push_back(weight);
  }
  double TotalWeight() const;
};

PointSet ToPointSet(const Multiset& multiset, int dim);

// Total absolute event mass of the stream.
double NablaNorm(const DiffStream& stream);
double NablaNorm(const Batch& batch);

// Incrementally materializes f(., t) from the differential stream and
// enforces prefix-positivity.
class SnapshotTracker {
 public:
  absl::Status Apply(const Batch& batch);
  const Multiset& counts() const { return counts_; }
  int64_t total() const { return total_; }

 private:
  Multiset counts_;
  int64_t total_ = 0;
};

absl::StatusOr<Multiset> CumulativeSnapshot(const DiffStream& stream,
                                            int64_t time);

// Checks that no prefix of the stream deletes a point that is not present.
absl::Status ValidatePrefixPositivity(const DiffStream& stream);

// Merges every batch with time <= t0 into new time 1 and shifts the rest so
// that new time k > 1 holds old time t0 + k - 1.
absl::StatusOr<DiffStream> ApplyInitialization(const DiffStream& stream,
                                               int64_t t0);

}  // namespace dpstream

#endif  // DPSTREAM_STREAM_H_
