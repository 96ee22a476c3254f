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

#ifndef DPSTREAM_HARNESS_H_
#define DPSTREAM_HARNESS_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpstream/counters.h"
#include "dpstream/evaluation.h"
#include "dpstream/stream.h"
#include "dpstream/synthesizer.h"
#include "json.hpp"

namespace dpstream {

enum class Method { kPhdStream, kBaseline1, kBaseline2, kBaseline3 };

std::string ToString(Method method);
absl::StatusOr<Method> ParseMethod(absl::string_view name);

struct GeneratorSpec {
  enum class Kind { kConcentricCircles, kUniformBox };

  Kind kind = Kind::kConcentricCircles;
  // Total number of events; rounded down to a multiple of batch_size.
  int64_t n_points = 50000;
  int64_t batch_size = 500;
  bool with_deletion = false;
  double r_inner = 0.15;
  double r_outer = 0.4;
  // Gaussian radial jitter.
  double sigma = 0.05;
  uint64_t seed = 0;

  static absl::StatusOr<GeneratorSpec> FromJson(const nlohmann::json& j);
  absl::Status Validate() const;
};

// Two circles centred in the unit square. Without deletion each batch adds
// points with the outer-circle share ramping linearly from 1 to 1/2. With
// deletion the first third of the batches fills the outer circle, and every
// later batch adds inner-circle points while deleting the oldest
// outer-circle points, until the outer circle is empty.
absl::StatusOr<DiffStream> GenCircles(const GeneratorSpec& spec,
                                      std::mt19937_64& rng);
absl::StatusOr<DiffStream> GenUniformBox(const GeneratorSpec& spec,
                                         std::mt19937_64& rng);
absl::StatusOr<DiffStream> Generate(const GeneratorSpec& spec);

// CSV with header `t,x,y,w` (w optional, default +1). Rows are grouped into
// batches by t. Malformed rows and out-of-domain points report the 1-based
// line number; prefix-positivity is checked on the grouped stream.
absl::StatusOr<DiffStream> ParseEventsCsv(std::istream& in,
                                          const Domain& domain);
absl::StatusOr<DiffStream> ReadEventsCsv(const std::string& path,
                                         const Domain& domain);
void WriteEventsCsv(const DiffStream& stream, std::ostream& out);

// Point dumps: header `x,y`, one point per row.
void WritePointsCsv(const PointSet& points, std::ostream& out);
absl::StatusOr<PointSet> ReadPointsCsv(const std::string& path);

struct ExperimentConfig {
  std::string input_csv;
  std::optional<GeneratorSpec> generator;
  std::vector<Interval> domain = {Interval{}, Interval{}};
  std::vector<Method> methods = {Method::kPhdStream};
  CounterKind counter = CounterKind::Simple();
  double epsilon = 0.5;
  double theta = 0.0;
  int beta = 2;
  int max_depth = 20;
  // 0 means no initialization.
  int64_t t0 = 1;
  int sensitivity = 1;
  std::vector<uint64_t> seeds = {0};
  std::vector<QueryClass> query_classes = {QueryClass::kSmall};
  uint64_t query_seed = 0;
  int64_t eval_interval = 1;
  std::string out_dir;
  bool dump_points = false;

  static absl::StatusOr<ExperimentConfig> FromJson(const nlohmann::json& j);
  static absl::StatusOr<ExperimentConfig> FromFile(const std::string& path);
  absl::Status Validate() const;
};

struct MetricsRow {
  Method method;
  uint64_t seed;
  double epsilon;
  double theta;
  int64_t t0;
  CounterKind counter;
  int64_t t;
  QueryClass query_class;
  double rel_error;
  double true_count;
  double synth_count;
};

inline constexpr absl::string_view kMetricsHeader =
    "method,seed,epsilon,theta,t0,counter,t,query_class,rel_error,"
    "true_count,synth_count";

std::string FormatMetricsCsv(const std::vector<MetricsRow>& rows);

// Called with each method/seed's synthetic points at every step.
using PointSink = std::function<absl::Status(Method, uint64_t seed,
                                             int64_t t, const PointSet&)>;

absl::StatusOr<DiffStream> LoadInput(const ExperimentConfig& config);

// Runs every method x seed over the configured stream and evaluates the
// relative error of each query class at every multiple of eval_interval and
// at the final step.
absl::StatusOr<std::vector<MetricsRow>> RunExperiment(
    const ExperimentConfig& config, const PointSink& sink = nullptr);

// RunExperiment plus output files: out_dir/metrics.csv and, when
// dump_points is set, out_dir/points/<method>_seed<seed>/points_<t>.csv.
absl::Status RunExperimentToDir(const ExperimentConfig& config);

struct EvalRow {
  int64_t t;
  QueryClass query_class;
  double rel_error;
  double true_count;
  double synth_count;
};

// Scores a directory of points_<t>.csv dumps against the true stream.
absl::StatusOr<std::vector<EvalRow>> EvaluateDumps(
    const DiffStream& truth, int64_t t0, const std::string& synth_dir,
    const std::vector<QueryClass>& classes, uint64_t query_seed);

// Deterministic query sets for the given classes.
std::vector<QuerySet> MakeQuerySets(const Domain& domain,
                                    const std::vector<QueryClass>& classes,
                                    uint64_t query_seed);

}  // namespace dpstream

#endif  // DPSTREAM_HARNESS_H_
