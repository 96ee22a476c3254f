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

#include "dpstream/evaluation.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "dpstream/noise.h"

namespace dpstream {

QueryClassSpec SpecFor(QueryClass cls) {
  switch (cls) {
    case QueryClass::kSmall:
      return {10000, 0.0001, 0.001};
    case QueryClass::kMedium:
      return {5000, 0.001, 0.01};
    case QueryClass::kLarge:
      return {1000, 0.01, 0.1};
  }
  return {0, 0.0, 0.0};
}

std::string ToString(QueryClass cls) {
  switch (cls) {
    case QueryClass::kSmall:
      return "small";
    case QueryClass::kMedium:
      return "medium";
    case QueryClass::kLarge:
      return "large";
  }
  return "unknown";
}

absl::StatusOr<QueryClass> ParseQueryClass(absl::string_view name) {
  const std::string lower = absl::AsciiStrToLower(name);
  if (lower == "small") return QueryClass::kSmall;
  if (lower == "medium") return QueryClass::kMedium;
  if (lower == "large") return QueryClass::kLarge;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown query class '", name, "'"));
}

bool RangeQuery::Contains(std::span<const double> p) const {
  for (size_t d = 0; d < lo.size(); ++d) {
    if (!(p[d] >= lo[d] && p[d] < hi[d])) return false;
  }
  return true;
}

double RangeQuery::Volume() const {
  double v = 1.0;
  for (size_t d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d];
  return v;
}

QuerySet GenQueries(const Domain& domain, QueryClass cls,
                    std::mt19937_64& rng) {
  const QueryClassSpec spec = SpecFor(cls);
  const int dim = domain.dim();
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * HalfOpenUnitInterval(rng());
  };
  QuerySet out{cls, {}};
  out.queries.reserve(spec.count);
  std::vector<double> side(dim);
  while (static_cast<int>(out.queries.size()) < spec.count) {
    const double area = uniform(spec.min_area, spec.max_area);
    // Side fractions with product `area`.
    const double base = std::pow(area, 1.0 / dim);
    std::fill(side.begin(), side.end(), base);
    if (dim >= 2) {
      const double aspect = std::exp(uniform(std::log(0.25), std::log(4.0)));
      side[0] *= std::sqrt(aspect);
      side[1] /= std::sqrt(aspect);
    }
    RangeQuery q;
    q.lo.resize(dim);
    q.hi.resize(dim);
    bool inside = true;
    for (int d = 0; d < dim; ++d) {
      const Interval& b = domain.bound(d);
      const double width = side[d] * (b.hi - b.lo);
      const double center = uniform(b.lo, b.hi);
      q.lo[d] = center - width / 2.0;
      q.hi[d] = center + width / 2.0;
      inside = inside && q.lo[d] >= b.lo && q.hi[d] <= b.hi;
    }
    if (inside) out.queries.push_back(std::move(q));
  }
  return out;
}

double RangeCount(const PointSet& points, const RangeQuery& query) {
  double sum = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (query.Contains(points.point(i))) sum += points.weights[i];
  }
  return sum;
}

RangeCounter::RangeCounter(const Domain& domain, PointSet points)
    : points_(std::move(points)) {
  total_ = points_.TotalWeight();
  if (points_.dim != 2 || domain.dim() != 2) return;
  gridded_ = true;
  const double n = static_cast<double>(points_.size());
  cells_ = std::clamp(static_cast<int>(std::sqrt(n / 2.0)), 1, 512);
  for (int d = 0; d < 2; ++d) {
    lo_[d] = domain.bound(d).lo;
    inv_width_[d] = cells_ / (domain.bound(d).hi - domain.bound(d).lo);
  }
  const int total_cells = cells_ * cells_;
  std::vector<int> cell_of(points_.size());
  cell_start_.assign(total_cells + 1, 0);
  for (size_t i = 0; i < points_.size(); ++i) {
    const auto p = points_.point(i);
    cell_of[i] = Cell(p[0], 0) * cells_ + Cell(p[1], 1);
    ++cell_start_[cell_of[i] + 1];
  }
  for (int c = 0; c < total_cells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(points_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (size_t i = 0; i < points_.size(); ++i) {
    order_[fill[cell_of[i]]++] = static_cast<int>(i);
  }
  const int stride = cells_ + 1;
  prefix_.assign(static_cast<size_t>(stride) * stride, 0.0);
  for (int ix = 0; ix < cells_; ++ix) {
    for (int iy = 0; iy < cells_; ++iy) {
      const int c = ix * cells_ + iy;
      double w = 0.0;
      for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
        w += points_.weights[order_[k]];
      }
      prefix_[(ix + 1) * stride + (iy + 1)] =
          w + prefix_[ix * stride + (iy + 1)] +
          prefix_[(ix + 1) * stride + iy] - prefix_[ix * stride + iy];
    }
  }
}

int RangeCounter::Cell(double x, int d) const {
  const double scaled = std::floor((x - lo_[d]) * inv_width_[d]);
  if (!(scaled >= 0.0)) return 0;
  if (scaled >= cells_ - 1) return cells_ - 1;
  return static_cast<int>(scaled);
}

double RangeCounter::Count(const RangeQuery& query) const {
  if (!gridded_) return RangeCount(points_, query);
  // Cell() is monotone in x, so a point whose cell lies strictly between
  // the cells of the query edges is inside the query, and a point whose
  // cell lies outside them is outside.
  const int x0 = Cell(query.lo[0], 0), x1 = Cell(query.hi[0], 0);
  const int y0 = Cell(query.lo[1], 1), y1 = Cell(query.hi[1], 1);
  const int stride = cells_ + 1;
  double sum = 0.0;
  if (x1 - x0 >= 2 && y1 - y0 >= 2) {
    // Interior cells [x0+1, x1-1] x [y0+1, y1-1].
    sum += prefix_[x1 * stride + y1] - prefix_[(x0 + 1) * stride + y1] -
           prefix_[x1 * stride + (y0 + 1)] +
           prefix_[(x0 + 1) * stride + (y0 + 1)];
  }
  auto scan = [&](int ix, int iy) {
    const int c = ix * cells_ + iy;
    for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      const int i = order_[k];
      if (query.Contains(points_.point(i))) sum += points_.weights[i];
    }
  };
  for (int ix = x0; ix <= x1; ++ix) {
    if (ix == x0 || ix == x1) {
      for (int iy = y0; iy <= y1; ++iy) scan(ix, iy);
    } else {
      scan(ix, y0);
      if (y1 != y0) scan(ix, y1);
    }
  }
  return sum;
}

absl::StatusOr<double> RelativeError(std::span<const double> true_counts,
                                     std::span<const double> synth_counts,
                                     double total_true) {
  if (true_counts.size() != synth_counts.size()) {
    return absl::InvalidArgumentError("Query count mismatch");
  }
  if (true_counts.empty()) {
    return absl::InvalidArgumentError("Empty query set");
  }
  if (total_true < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("total_true must be >= 0, got ", total_true));
  }
  double sum = 0.0;
  for (size_t i = 0; i < true_counts.size(); ++i) {
    const double denominator = std::max(true_counts[i], 0.001 * total_true);
    if (!(denominator > 0.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Relative error undefined: query ", i,
          " has zero true count and the true total is zero"));
    }
    sum += std::abs(true_counts[i] - synth_counts[i]) / denominator;
  }
  return sum / static_cast<double>(true_counts.size());
}

absl::StatusOr<double> RelativeError(const QuerySet& queries,
                                     const RangeCounter& truth,
                                     const RangeCounter& synthetic) {
  std::vector<double> t, s;
  t.reserve(queries.queries.size());
  s.reserve(queries.queries.size());
  for (const RangeQuery& q : queries.queries) {
    t.push_back(truth.Count(q));
    s.push_back(synthetic.Count(q));
  }
  return RelativeError(t, s, truth.total());
}

}  // namespace dpstream
