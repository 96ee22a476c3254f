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

#include "dpstream/stream.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace dpstream {

absl::StatusOr<Domain> Domain::Create(std::vector<Interval> bounds) {
  if (bounds.empty()) {
    return absl::InvalidArgumentError("Domain needs at least one dimension");
  }
  for (size_t d = 0; d < bounds.size(); ++d) {
    const Interval& b = bounds[d];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Domain interval ", d, " must satisfy lo < hi, got [", b.lo, ", ",
          b.hi, "]"));
    }
  }
  return Domain(std::move(bounds));
}

Domain Domain::UnitCube(int dim) {
  return Domain(std::vector<Interval>(static_cast<size_t>(dim), Interval{}));
}

bool Domain::Contains(std::span<const double> p) const {
  if (p.size() != bounds_.size()) return false;
  for (size_t d = 0; d < p.size(); ++d) {
    if (!(p[d] >= bounds_[d].lo && p[d] <= bounds_[d].hi)) return false;
  }
  return true;
}

double Domain::Volume() const {
  double v = 1.0;
  for (const Interval& b : bounds_) v *= b.hi - b.lo;
  return v;
}

absl::StatusOr<DiffStream> DiffStream::Create(std::vector<Batch> batches) {
  int64_t previous = 0;
  for (const Batch& batch : batches) {
    if (batch.time < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("Batch time must be >= 1, got ", batch.time));
    }
    if (batch.time <= previous) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Batch times must be strictly increasing, got ", batch.time,
          " after ", previous));
    }
    for (const Event& e : batch.events) {
      if (e.weight != 1 && e.weight != -1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "Event weight must be +1 or -1, got ", e.weight, " at time ",
            batch.time));
      }
    }
    previous = batch.time;
  }
  return DiffStream(std::move(batches));
}

Batch DiffStream::BatchAt(int64_t time) const {
  auto it = std::lower_bound(
      batches_.begin(), batches_.end(), time,
      [](const Batch& b, int64_t t) { return b.time < t; });
  if (it != batches_.end() && it->time == time) return *it;
  return Batch{time, {}};
}

double PointSet::TotalWeight() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

PointSet ToPointSet(const Multiset& multiset, int dim) {
  PointSet out;
  out.dim = dim;
  out.coords.reserve(multiset.size() * dim);
  out.weights.reserve(multiset.size());
  for (const auto& [p, count] : multiset) {
    out.Add(p, static_cast<double>(count));
  }
  return out;
}

double NablaNorm(const Batch& batch) {
  double norm = 0.0;
  for (const Event& e : batch.events) norm += std::abs(e.weight);
  return norm;
}

double NablaNorm(const DiffStream& stream) {
  double norm = 0.0;
  for (const Batch& batch : stream.batches()) norm += NablaNorm(batch);
  return norm;
}

absl::Status SnapshotTracker::Apply(const Batch& batch) {
  for (const Event& e : batch.events) {
    int64_t& count = counts_[e.point];
    count += e.weight;
    total_ += e.weight;
    if (count < 0) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Prefix-positivity violated at time ", batch.time, ": point (",
          absl::StrJoin(e.point, ", "), ") deleted more often than added"));
    }
    if (count == 0) counts_.erase(e.point);
  }
  return absl::OkStatus();
}

absl::StatusOr<Multiset> CumulativeSnapshot(const DiffStream& stream,
                                            int64_t time) {
  if (time < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Snapshot time must be >= 1, got ", time));
  }
  SnapshotTracker tracker;
  for (const Batch& batch : stream.batches()) {
    if (batch.time > time) break;
    if (absl::Status s = tracker.Apply(batch); !s.ok()) return s;
  }
  return tracker.counts();
}

absl::Status ValidatePrefixPositivity(const DiffStream& stream) {
  SnapshotTracker tracker;
  for (const Batch& batch : stream.batches()) {
    if (absl::Status s = tracker.Apply(batch); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<DiffStream> ApplyInitialization(const DiffStream& stream,
                                               int64_t t0) {
  if (t0 < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Initialization time must be >= 1, got ", t0));
  }
  std::vector<Batch> out;
  Batch first{1, {}};
  bool has_first = false;
  for (const Batch& batch : stream.batches()) {
    if (batch.time <= t0) {
      first.events.insert(first.events.end(), batch.events.begin(),
                          batch.events.end());
      has_first = true;
    } else {
      if (has_first) {
        out.push_back(std::move(first));
        has_first = false;
      }
      out.push_back(Batch{batch.time - t0 + 1, batch.events});
    }
  }
  if (has_first) out.push_back(std::move(first));
  return DiffStream::Create(std::move(out));
}

}  // namespace dpstream
