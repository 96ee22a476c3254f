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

#include "dpstream/harness.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "dpstream/baselines.h"

namespace dpstream {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

absl::Status WithContext(const absl::Status& s, absl::string_view context) {
  if (s.ok()) return s;
  return absl::Status(s.code(), absl::StrCat(context, ": ", s.message()));
}

Point CirclePoint(double radius, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double a = angle(rng);
  const double r = radius + sigma * jitter(rng);
  Point p = {0.5 + r * std::cos(a), 0.5 + r * std::sin(a)};
  for (double& x : p) x = std::clamp(x, 0.0, 1.0);
  return p;
}

int64_t BatchCount(const GeneratorSpec& spec) {
  return spec.n_points / spec.batch_size;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  for (absl::string_view piece : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    out.emplace_back(absl::StripAsciiWhitespace(piece));
  }
  return out;
}

absl::StatusOr<std::vector<Method>> ParseMethods(const json& j) {
  std::vector<Method> out;
  std::vector<std::string> names;
  if (j.is_string()) {
    names = SplitList(j.get<std::string>());
  } else {
    names = j.get<std::vector<std::string>>();
  }
  for (const std::string& name : names) {
    absl::StatusOr<Method> m = ParseMethod(name);
    if (!m.ok()) return m.status();
    out.push_back(*m);
  }
  return out;
}

absl::StatusOr<std::vector<QueryClass>> ParseClasses(const json& j) {
  std::vector<QueryClass> out;
  std::vector<std::string> names;
  if (j.is_string()) {
    names = SplitList(j.get<std::string>());
  } else {
    names = j.get<std::vector<std::string>>();
  }
  for (const std::string& name : names) {
    absl::StatusOr<QueryClass> c = ParseQueryClass(name);
    if (!c.ok()) return c.status();
    out.push_back(*c);
  }
  return out;
}

std::string FormatDouble(double x) { return absl::StrFormat("%.10g", x); }

// True counts of every query at one evaluation time.
struct TruthAt {
  double total = 0.0;
  std::vector<std::vector<double>> counts;  // per query class
};

std::vector<int64_t> EvalTimes(int64_t horizon, int64_t interval) {
  std::vector<int64_t> times;
  for (int64_t t = interval; t <= horizon; t += interval) times.push_back(t);
  if (horizon > 0 && (times.empty() || times.back() != horizon)) {
    times.push_back(horizon);
  }
  return times;
}

absl::StatusOr<std::map<int64_t, TruthAt>> ComputeTruth(
    const DiffStream& initialized, const Domain& domain,
    const std::vector<QuerySet>& query_sets,
    const std::vector<int64_t>& times) {
  std::map<int64_t, TruthAt> truth;
  SnapshotTracker tracker;
  size_t next = 0;
  for (int64_t t = 1; t <= initialized.horizon() && next < times.size();
       ++t) {
    if (absl::Status s = tracker.Apply(initialized.BatchAt(t)); !s.ok()) {
      return s;
    }
    if (t != times[next]) continue;
    ++next;
    RangeCounter counter(domain, ToPointSet(tracker.counts(), domain.dim()));
    TruthAt& at = truth[t];
    at.total = counter.total();
    for (const QuerySet& qs : query_sets) {
      std::vector<double>& counts = at.counts.emplace_back();
      counts.reserve(qs.queries.size());
      for (const RangeQuery& q : qs.queries) counts.push_back(counter.Count(q));
    }
  }
  return truth;
}

}  // namespace

std::string ToString(Method method) {
  switch (method) {
    case Method::kPhdStream:
      return "phdstream";
    case Method::kBaseline1:
      return "baseline1";
    case Method::kBaseline2:
      return "baseline2";
    case Method::kBaseline3:
      return "baseline3";
  }
  return "unknown";
}

absl::StatusOr<Method> ParseMethod(absl::string_view name) {
  const std::string lower = absl::AsciiStrToLower(name);
  if (lower == "phdstream") return Method::kPhdStream;
  if (lower == "baseline1") return Method::kBaseline1;
  if (lower == "baseline2") return Method::kBaseline2;
  if (lower == "baseline3") return Method::kBaseline3;
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown method '", name,
      "'; expected phdstream, baseline1, baseline2 or baseline3"));
}

absl::StatusOr<GeneratorSpec> GeneratorSpec::FromJson(const json& j) {
  GeneratorSpec spec;
  try {
    if (!j.is_object()) {
      return absl::InvalidArgumentError("Generator spec must be an object");
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") {
        const std::string kind = value.get<std::string>();
        if (kind == "concentric_circles") {
          spec.kind = Kind::kConcentricCircles;
        } else if (kind == "uniform_box") {
          spec.kind = Kind::kUniformBox;
        } else {
          return absl::InvalidArgumentError(
              absl::StrCat("Unknown generator kind '", kind, "'"));
        }
      } else if (key == "n_points") {
        spec.n_points = value.get<int64_t>();
      } else if (key == "batch_size") {
        spec.batch_size = value.get<int64_t>();
      } else if (key == "with_deletion") {
        spec.with_deletion = value.get<bool>();
      } else if (key == "r_inner") {
        spec.r_inner = value.get<double>();
      } else if (key == "r_outer") {
        spec.r_outer = value.get<double>();
      } else if (key == "sigma") {
        spec.sigma = value.get<double>();
      } else if (key == "seed") {
        spec.seed = value.get<uint64_t>();
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("Unknown generator key '", key, "'"));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("Bad generator spec: ", e.what()));
  }
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  return spec;
}

absl::Status GeneratorSpec::Validate() const {
  if (batch_size < 1) {
    return absl::InvalidArgumentError("batch_size must be >= 1");
  }
  if (n_points < batch_size) {
    return absl::InvalidArgumentError("n_points must be >= batch_size");
  }
  if (kind == Kind::kConcentricCircles) {
    if (!(0.0 < r_inner && r_inner < r_outer && r_outer <= 0.5)) {
      return absl::InvalidArgumentError(
          "Radii must satisfy 0 < r_inner < r_outer <= 0.5");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      return absl::InvalidArgumentError("sigma must be finite and >= 0");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<DiffStream> GenCircles(const GeneratorSpec& spec,
                                      std::mt19937_64& rng) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  const int64_t num_batches = BatchCount(spec);
  const int64_t b = spec.batch_size;
  std::vector<Batch> batches;
  batches.reserve(num_batches);

  if (!spec.with_deletion) {
    for (int64_t k = 0; k < num_batches; ++k) {
      const double share =
          num_batches == 1
              ? 1.0
              : 1.0 - 0.5 * static_cast<double>(k) / (num_batches - 1);
      const int64_t outer = std::llround(share * b);
      Batch batch{.time = k + 1, .events = {}};
      for (int64_t i = 0; i < b; ++i) {
        const double radius = i < outer ? spec.r_outer : spec.r_inner;
        batch.events.push_back({CirclePoint(radius, spec.sigma, rng), +1});
      }
      batches.push_back(std::move(batch));
    }
    return DiffStream::Create(std::move(batches));
  }

  // Fill the outer circle, then move its mass to the inner circle.
  const int64_t warmup = std::max<int64_t>(1, num_batches / 3);
  const int64_t migrate = num_batches - warmup;
  const int64_t to_delete = warmup * b;
  std::deque<Point> outer;
  for (int64_t k = 0; k < num_batches; ++k) {
    Batch batch{.time = k + 1, .events = {}};
    if (k < warmup) {
      for (int64_t i = 0; i < b; ++i) {
        Point p = CirclePoint(spec.r_outer, spec.sigma, rng);
        outer.push_back(p);
        batch.events.push_back({std::move(p), +1});
      }
    } else {
      const int64_t j = k - warmup;
      const int64_t deletions =
          (j + 1) * to_delete / migrate - j * to_delete / migrate;
      for (int64_t i = 0; i < b - deletions; ++i) {
        batch.events.push_back(
            {CirclePoint(spec.r_inner, spec.sigma, rng), +1});
      }
      for (int64_t i = 0; i < deletions && !outer.empty(); ++i) {
        batch.events.push_back({outer.front(), -1});
        outer.pop_front();
      }
    }
    batches.push_back(std::move(batch));
  }
  return DiffStream::Create(std::move(batches));
}

absl::StatusOr<DiffStream> GenUniformBox(const GeneratorSpec& spec,
                                         std::mt19937_64& rng) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Batch> batches;
  for (int64_t k = 0; k < BatchCount(spec); ++k) {
    Batch batch{.time = k + 1, .events = {}};
    for (int64_t i = 0; i < spec.batch_size; ++i) {
      const double x = unit(rng);
      const double y = unit(rng);
      batch.events.push_back({Point{x, y}, +1});
    }
    batches.push_back(std::move(batch));
  }
  return DiffStream::Create(std::move(batches));
}

absl::StatusOr<DiffStream> Generate(const GeneratorSpec& spec) {
  std::mt19937_64 rng(DeriveSeed(spec.seed, 7));
  switch (spec.kind) {
    case GeneratorSpec::Kind::kConcentricCircles:
      return GenCircles(spec, rng);
    case GeneratorSpec::Kind::kUniformBox:
      return GenUniformBox(spec, rng);
  }
  return absl::InternalError("Unhandled generator kind");
}

absl::StatusOr<DiffStream> ParseEventsCsv(std::istream& in,
                                          const Domain& domain) {
  std::string line;
  int64_t line_no = 0;
  if (!std::getline(in, line)) {
    return absl::DataLossError("Events CSV is empty; expected header t,x,y,w");
  }
  ++line_no;
  std::vector<std::string> header = SplitList(line);
  const bool has_weight = header.size() == 4 && header[3] == "w";
  if (header.size() < 3 || header[0] != "t" || header[1] != "x" ||
      header[2] != "y" || (header.size() == 4 && !has_weight) ||
      header.size() > 4) {
    return absl::DataLossError(
        absl::StrCat("Line 1: expected header t,x,y[,w], got '", line, "'"));
  }
  if (domain.dim() != 2) {
    return absl::InvalidArgumentError("Events CSV needs a 2-d domain");
  }
  std::map<int64_t, Batch> grouped;
  while (std::getline(in, line)) {
    ++line_no;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, ',');
    if (fields.size() != header.size()) {
      return absl::DataLossError(absl::StrCat(
          "Line ", line_no, ": expected ", header.size(), " fields, got ",
          fields.size()));
    }
    int64_t t;
    double x, y;
    int w = 1;
    if (!absl::SimpleAtoi(fields[0], &t) || t < 1) {
      return absl::DataLossError(absl::StrCat(
          "Line ", line_no, ": t must be a positive integer, got '",
          fields[0], "'"));
    }
    if (!absl::SimpleAtod(fields[1], &x) || !absl::SimpleAtod(fields[2], &y) ||
        !std::isfinite(x) || !std::isfinite(y)) {
      return absl::DataLossError(
          absl::StrCat("Line ", line_no, ": malformed coordinates"));
    }
    if (has_weight && (!absl::SimpleAtoi(fields[3], &w) || (w != 1 && w != -1))) {
      return absl::DataLossError(absl::StrCat(
          "Line ", line_no, ": w must be 1 or -1, got '", fields[3], "'"));
    }
    Point p = {x, y};
    if (!domain.Contains(p)) {
      return absl::OutOfRangeError(absl::StrFormat(
          "Line %d: point (%g, %g) is outside the domain", line_no, x, y));
    }
    Batch& batch = grouped[t];
    batch.time = t;
    batch.events.push_back({std::move(p), w});
  }
  std::vector<Batch> batches;
  batches.reserve(grouped.size());
  for (auto& [t, batch] : grouped) batches.push_back(std::move(batch));
  absl::StatusOr<DiffStream> stream = DiffStream::Create(std::move(batches));
  if (!stream.ok()) {
    return absl::DataLossError(stream.status().message());
  }
  if (absl::Status s = ValidatePrefixPositivity(*stream); !s.ok()) {
    return absl::FailedPreconditionError(s.message());
  }
  return stream;
}

absl::StatusOr<DiffStream> ReadEventsCsv(const std::string& path,
                                         const Domain& domain) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("Cannot open ", path));
  absl::StatusOr<DiffStream> stream = ParseEventsCsv(in, domain);
  if (!stream.ok()) return WithContext(stream.status(), path);
  return stream;
}

void WriteEventsCsv(const DiffStream& stream, std::ostream& out) {
  out << "t,x,y,w\n";
  for (const Batch& batch : stream.batches()) {
    for (const Event& e : batch.events) {
      out << absl::StrFormat("%d,%.17g,%.17g,%d\n", batch.time, e.point[0],
                             e.point[1], e.weight);
    }
  }
}

void WritePointsCsv(const PointSet& points, std::ostream& out) {
  out << "x,y\n";
  for (size_t i = 0; i < points.size(); ++i) {
    std::span<const double> p = points.point(i);
    out << absl::StrFormat("%.17g,%.17g\n", p[0], p[1]);
  }
}

absl::StatusOr<PointSet> ReadPointsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("Cannot open ", path));
  std::string line;
  int64_t line_no = 0;
  PointSet points;
  points.dim = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, ',');
    double x, y;
    if (fields.size() != 2 || !absl::SimpleAtod(fields[0], &x) ||
        !absl::SimpleAtod(fields[1], &y)) {
      return absl::DataLossError(
          absl::StrCat(path, ": line ", line_no, ": malformed point"));
    }
    const double p[2] = {x, y};
    points.Add(p);
  }
  return points;
}

absl::StatusOr<ExperimentConfig> ExperimentConfig::FromJson(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) {
      return absl::InvalidArgumentError("Config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "input") {
        if (value.is_string()) {
          c.input_csv = value.get<std::string>();
        } else {
          absl::StatusOr<GeneratorSpec> g = GeneratorSpec::FromJson(value);
          if (!g.ok()) return g.status();
          c.generator = *g;
        }
      } else if (key == "generator") {
        absl::StatusOr<GeneratorSpec> g = GeneratorSpec::FromJson(value);
        if (!g.ok()) return g.status();
        c.generator = *g;
      } else if (key == "domain") {
        c.domain.clear();
        for (const json& b : value) {
          c.domain.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        }
      } else if (key == "method" || key == "methods") {
        absl::StatusOr<std::vector<Method>> m = ParseMethods(value);
        if (!m.ok()) return m.status();
        c.methods = *m;
      } else if (key == "counter") {
        absl::StatusOr<CounterKind> k =
            CounterKind::Parse(value.get<std::string>());
        if (!k.ok()) return k.status();
        c.counter = *k;
      } else if (key == "epsilon") {
        c.epsilon = value.get<double>();
      } else if (key == "theta") {
        c.theta = value.get<double>();
      } else if (key == "beta") {
        c.beta = value.get<int>();
      } else if (key == "max_depth") {
        c.max_depth = value.get<int>();
      } else if (key == "t0") {
        c.t0 = value.get<int64_t>();
      } else if (key == "sensitivity") {
        c.sensitivity = value.get<int>();
      } else if (key == "seed") {
        c.seeds = {value.get<uint64_t>()};
      } else if (key == "seeds") {
        c.seeds = value.get<std::vector<uint64_t>>();
      } else if (key == "queries") {
        absl::StatusOr<std::vector<QueryClass>> q = ParseClasses(value);
        if (!q.ok()) return q.status();
        c.query_classes = *q;
      } else if (key == "query_seed") {
        c.query_seed = value.get<uint64_t>();
      } else if (key == "eval_interval") {
        c.eval_interval = value.get<int64_t>();
      } else if (key == "out_dir" || key == "out") {
        c.out_dir = value.get<std::string>();
      } else if (key == "dump_points") {
        c.dump_points = value.get<bool>();
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("Unknown config key '", key, "'"));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("Bad config: ", e.what()));
  }
  return c;
}

absl::StatusOr<ExperimentConfig> ExperimentConfig::FromFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("Cannot open ", path));
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false,
                       /*ignore_comments=*/true);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": not valid JSON"));
  }
  absl::StatusOr<ExperimentConfig> c = FromJson(j);
  if (!c.ok()) return WithContext(c.status(), path);
  // Relative input paths are resolved against the config's directory.
  if (!c->input_csv.empty() && fs::path(c->input_csv).is_relative()) {
    c->input_csv = (fs::path(path).parent_path() / c->input_csv).string();
  }
  return c;
}

absl::Status ExperimentConfig::Validate() const {
  if (input_csv.empty() == !generator.has_value()) {
    return absl::InvalidArgumentError(
        "Exactly one of an input CSV path or a generator spec is required");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be > 0");
  }
  if (!std::isfinite(theta)) {
    return absl::InvalidArgumentError("theta must be finite");
  }
  if (seeds.empty()) return absl::InvalidArgumentError("seeds is empty");
  if (methods.empty()) return absl::InvalidArgumentError("methods is empty");
  if (query_classes.empty()) {
    return absl::InvalidArgumentError("queries is empty");
  }
  if (eval_interval < 1) {
    return absl::InvalidArgumentError("eval_interval must be >= 1");
  }
  if (t0 < 0) return absl::InvalidArgumentError("t0 must be >= 0");
  if (sensitivity < 1) {
    return absl::InvalidArgumentError("sensitivity must be >= 1");
  }
  if (domain.size() != 2) {
    return absl::InvalidArgumentError("domain must be 2-dimensional");
  }
  for (Method m : methods) {
    if (m == Method::kBaseline3 && t0 < 1) {
      return absl::InvalidArgumentError(
          "baseline3 only has results with an initialization time t0 > 0");
    }
  }
  if (absl::Status s = counter.Validate(); !s.ok()) return s;
  absl::StatusOr<Domain> d = Domain::Create(domain);
  if (!d.ok()) return d.status();
  absl::StatusOr<PartitionTree> tree =
      PartitionTree::Create(*d, beta, max_depth);
  return tree.status();
}

std::string FormatMetricsCsv(const std::vector<MetricsRow>& rows) {
  std::string out = absl::StrCat(kMetricsHeader, "\n");
  for (const MetricsRow& r : rows) {
    absl::StrAppend(&out, ToString(r.method), ",", r.seed, ",",
                    FormatDouble(r.epsilon), ",", FormatDouble(r.theta), ",",
                    r.t0, ",", r.counter.ToString(), ",", r.t, ",",
                    ToString(r.query_class), ",", FormatDouble(r.rel_error),
                    ",", FormatDouble(r.true_count), ",",
                    FormatDouble(r.synth_count), "\n");
  }
  return out;
}

absl::StatusOr<DiffStream> LoadInput(const ExperimentConfig& config) {
  if (config.generator.has_value()) return Generate(*config.generator);
  absl::StatusOr<Domain> domain = Domain::Create(config.domain);
  if (!domain.ok()) return domain.status();
  return ReadEventsCsv(config.input_csv, *domain);
}

std::vector<QuerySet> MakeQuerySets(const Domain& domain,
                                    const std::vector<QueryClass>& classes,
                                    uint64_t query_seed) {
  std::vector<QuerySet> sets;
  for (QueryClass cls : classes) {
    std::mt19937_64 rng(
        DeriveSeed(query_seed, 100 + static_cast<uint64_t>(cls)));
    sets.push_back(GenQueries(domain, cls, rng));
  }
  return sets;
}

absl::StatusOr<std::vector<MetricsRow>> RunExperiment(
    const ExperimentConfig& config, const PointSink& sink) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<Domain> domain = Domain::Create(config.domain);
  if (!domain.ok()) return domain.status();
  absl::StatusOr<PartitionTree> tree =
      PartitionTree::Create(*domain, config.beta, config.max_depth);
  if (!tree.ok()) return tree.status();
  absl::StatusOr<DiffStream> stream = LoadInput(config);
  if (!stream.ok()) return stream.status();
  absl::StatusOr<DiffStream> initialized =
      ApplyInitialization(*stream, std::max<int64_t>(config.t0, 1));
  if (!initialized.ok()) return initialized.status();

  const std::vector<QuerySet> query_sets =
      MakeQuerySets(*domain, config.query_classes, config.query_seed);
  const std::vector<int64_t> times =
      EvalTimes(initialized->horizon(), config.eval_interval);
  absl::StatusOr<std::map<int64_t, TruthAt>> truth =
      ComputeTruth(*initialized, *domain, query_sets, times);
  if (!truth.ok()) return truth.status();

  std::vector<MetricsRow> rows;
  for (Method method : config.methods) {
    for (uint64_t seed : config.seeds) {
      EngineConfig engine{.tree = *tree,
                          .epsilon = config.epsilon,
                          .theta = config.theta,
                          .counter = config.counter,
                          .sensitivity = config.sensitivity,
                          .seed = seed};
      StepCallback on_step = [&](const StepOutput& out) -> absl::Status {
        if (sink) {
          if (absl::Status s = sink(method, seed, out.time, out.points);
              !s.ok()) {
            return s;
          }
        }
        auto it = truth->find(out.time);
        if (it == truth->end()) return absl::OkStatus();
        const TruthAt& at = it->second;
        RangeCounter synth(*domain, out.points);
        for (size_t c = 0; c < query_sets.size(); ++c) {
          std::vector<double> counts;
          counts.reserve(query_sets[c].queries.size());
          for (const RangeQuery& q : query_sets[c].queries) {
            counts.push_back(synth.Count(q));
          }
          absl::StatusOr<double> err =
              RelativeError(at.counts[c], counts, at.total);
          if (!err.ok()) {
            return WithContext(err.status(),
                               absl::StrCat("t=", out.time));
          }
          rows.push_back({.method = method,
                          .seed = seed,
                          .epsilon = config.epsilon,
                          .theta = config.theta,
                          .t0 = config.t0,
                          .counter = config.counter,
                          .t = out.time,
                          .query_class = query_sets[c].cls,
                          .rel_error = *err,
                          .true_count = at.total,
                          .synth_count = synth.total()});
        }
        return absl::OkStatus();
      };
      absl::Status s;
      if (method == Method::kPhdStream) {
        // The stream is already initialized; t0 = 1 is a no-op here.
        s = RunStream(engine, *initialized,
                      RunOptions{.engine = EngineKind::kEfficient, .t0 = 1},
                      on_step);
      } else {
        const BaselineKind kind = method == Method::kBaseline1
                                      ? BaselineKind::kOfflineOnStream
                                  : method == Method::kBaseline2
                                      ? BaselineKind::kOfflineOnDiff
                                      : BaselineKind::kInitThenCount;
        s = RunBaseline(kind, engine, *initialized, /*t0=*/1, /*sample=*/true,
                        on_step);
      }
      if (!s.ok()) {
        return WithContext(
            s, absl::StrCat(ToString(method), " seed ", seed));
      }
    }
  }
  return rows;
}

absl::Status RunExperimentToDir(const ExperimentConfig& config) {
  if (config.out_dir.empty()) {
    return absl::InvalidArgumentError("No output directory configured");
  }
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    return absl::InvalidArgumentError(
        absl::StrCat("Cannot create ", config.out_dir, ": ", ec.message()));
  }
  PointSink sink = nullptr;
  if (config.dump_points) {
    sink = [&](Method method, uint64_t seed, int64_t t,
               const PointSet& points) -> absl::Status {
      const fs::path dir = fs::path(config.out_dir) / "points" /
                           absl::StrCat(ToString(method), "_seed", seed);
      std::error_code err;
      fs::create_directories(dir, err);
      std::ofstream out(dir / absl::StrCat("points_", t, ".csv"));
      if (err || !out) {
        return absl::InternalError(
            absl::StrCat("Cannot write points under ", dir.string()));
      }
      WritePointsCsv(points, out);
      return absl::OkStatus();
    };
  }
  absl::StatusOr<std::vector<MetricsRow>> rows = RunExperiment(config, sink);
  if (!rows.ok()) return rows.status();
  std::ofstream out(fs::path(config.out_dir) / "metrics.csv",
                    std::ios::binary);
  if (!out) return absl::InternalError("Cannot write metrics.csv");
  out << FormatMetricsCsv(*rows);
  return absl::OkStatus();
}

absl::StatusOr<std::vector<EvalRow>> EvaluateDumps(
    const DiffStream& truth, int64_t t0, const std::string& synth_dir,
    const std::vector<QueryClass>& classes, uint64_t query_seed) {
  std::map<int64_t, fs::path> dumps;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(synth_dir, ec)) {
    const std::string name = entry.path().filename().string();
    int64_t t;
    if (name.starts_with("points_") && name.ends_with(".csv") &&
        absl::SimpleAtoi(name.substr(7, name.size() - 11), &t)) {
      dumps[t] = entry.path();
    }
  }
  if (ec) {
    return absl::NotFoundError(
        absl::StrCat("Cannot list ", synth_dir, ": ", ec.message()));
  }
  if (dumps.empty()) {
    return absl::NotFoundError(
        absl::StrCat("No points_<t>.csv files in ", synth_dir));
  }
  const Domain domain = Domain::UnitCube(2);
  absl::StatusOr<DiffStream> initialized =
      ApplyInitialization(truth, std::max<int64_t>(t0, 1));
  if (!initialized.ok()) return initialized.status();
  const std::vector<QuerySet> query_sets =
      MakeQuerySets(domain, classes, query_seed);
  std::vector<int64_t> times;
  for (const auto& [t, path] : dumps) times.push_back(t);
  absl::StatusOr<std::map<int64_t, TruthAt>> true_counts =
      ComputeTruth(*initialized, domain, query_sets, times);
  if (!true_counts.ok()) return true_counts.status();

  std::vector<EvalRow> rows;
  for (const auto& [t, path] : dumps) {
    auto it = true_counts->find(t);
    if (it == true_counts->end()) {
      return absl::OutOfRangeError(
          absl::StrCat(path.string(), ": t=", t, " is past the stream"));
    }
    absl::StatusOr<PointSet> points = ReadPointsCsv(path.string());
    if (!points.ok()) return points.status();
    RangeCounter synth(domain, *std::move(points));
    for (size_t c = 0; c < query_sets.size(); ++c) {
      std::vector<double> counts;
      for (const RangeQuery& q : query_sets[c].queries) {
        counts.push_back(synth.Count(q));
      }
      absl::StatusOr<double> err =
          RelativeError(it->second.counts[c], counts, it->second.total);
      if (!err.ok()) return err.status();
      rows.push_back({t, query_sets[c].cls, *err, it->second.total,
                      synth.total()});
    }
  }
  return rows;
}

}  // namespace dpstream
