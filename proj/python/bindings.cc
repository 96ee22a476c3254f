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

// Python bindings. Configs and specs cross the boundary as JSON text; the
// pure-Python wrapper in dpstream/__init__.py handles dict conversion.

#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpstream/baselines.h"
#include "dpstream/counters.h"
#include "dpstream/evaluation.h"
#include "dpstream/harness.h"
#include "dpstream/privtree.h"
#include "dpstream/stream.h"
#include "dpstream/synthesizer.h"
#include "json.hpp"
#include "pybind11/numpy.h"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"

namespace py = pybind11;

namespace dpstream {
namespace {

void ThrowIfError(const absl::Status& status) {
  if (status.ok()) return;
  const std::string message(status.message());
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      throw py::value_error(message);
    case absl::StatusCode::kNotFound:
      throw py::key_error(message);
    default:
      throw std::runtime_error(message);
  }
}

template <typename T>
T ValueOrThrow(absl::StatusOr<T> value) {
  ThrowIfError(value.status());
  return *std::move(value);
}

using EventTuple = std::tuple<int64_t, double, double, int>;

std::vector<EventTuple> ToTuples(const DiffStream& stream) {
  std::vector<EventTuple> out;
  for (const Batch& b : stream.batches()) {
    for (const Event& e : b.events) {
      out.emplace_back(b.time, e.point[0], e.point[1], e.weight);
    }
  }
  return out;
}

DiffStream FromTuples(const std::vector<EventTuple>& events,
                      const Domain& domain) {
  std::map<int64_t, Batch> grouped;
  for (const auto& [t, x, y, w] : events) {
    Point p = {x, y};
    if (!domain.Contains(p)) {
      throw py::value_error("event point outside the domain");
    }
    if (w != 1 && w != -1) throw py::value_error("weight must be 1 or -1");
    Batch& batch = grouped[t];
    batch.time = t;
    batch.events.push_back({std::move(p), w});
  }
  std::vector<Batch> batches;
  for (auto& [t, b] : grouped) batches.push_back(std::move(b));
  DiffStream stream = ValueOrThrow(DiffStream::Create(std::move(batches)));
  ThrowIfError(ValidatePrefixPositivity(stream));
  return stream;
}

py::array_t<double> ToArray(const PointSet& points) {
  py::array_t<double> out({static_cast<py::ssize_t>(points.size()),
                           static_cast<py::ssize_t>(points.dim)});
  std::copy(points.coords.begin(), points.coords.end(), out.mutable_data());
  return out;
}

std::vector<EventTuple> PyGenerate(const std::string& spec_json) {
  GeneratorSpec spec = ValueOrThrow(
      GeneratorSpec::FromJson(nlohmann::json::parse(spec_json)));
  ThrowIfError(spec.Validate());
  return ToTuples(ValueOrThrow(Generate(spec)));
}

py::list PyRunExperiment(const std::string& config_json) {
  ExperimentConfig config = ValueOrThrow(
      ExperimentConfig::FromJson(nlohmann::json::parse(config_json)));
  std::vector<MetricsRow> rows;
  {
    py::gil_scoped_release release;
    rows = ValueOrThrow(RunExperiment(config));
  }
  py::list out;
  for (const MetricsRow& r : rows) {
    py::dict d;
    d["method"] = ToString(r.method);
    d["seed"] = r.seed;
    d["epsilon"] = r.epsilon;
    d["theta"] = r.theta;
    d["t0"] = r.t0;
    d["counter"] = r.counter.ToString();
    d["t"] = r.t;
    d["query_class"] = ToString(r.query_class);
    d["rel_error"] = r.rel_error;
    d["true_count"] = r.true_count;
    d["synth_count"] = r.synth_count;
    out.append(d);
  }
  return out;
}

py::list PySynthesize(const std::vector<EventTuple>& events,
                      const std::string& method, double epsilon, double theta,
                      const std::string& counter, int beta, int max_depth,
                      int64_t t0, uint64_t seed) {
  const Domain domain = Domain::UnitCube(2);
  DiffStream stream = FromTuples(events, domain);
  EngineConfig config{
      .tree = ValueOrThrow(PartitionTree::Create(domain, beta, max_depth)),
      .epsilon = epsilon,
      .theta = theta,
      .counter = ValueOrThrow(CounterKind::Parse(counter)),
      .sensitivity = 1,
      .seed = seed};
  ThrowIfError(config.Validate());
  const Method m = ValueOrThrow(ParseMethod(method));
  std::vector<StepOutput> steps;
  StepCallback collect = [&](const StepOutput& out) {
    steps.push_back(out);
    return absl::OkStatus();
  };
  {
    py::gil_scoped_release release;
    absl::Status s;
    if (m == Method::kPhdStream) {
      s = RunStream(config, stream, RunOptions{.engine = EngineKind::kEfficient,
                                               .t0 = t0,
                                               .sample = true},
                    collect);
    } else {
      const BaselineKind kind = m == Method::kBaseline1
                                    ? BaselineKind::kOfflineOnStream
                                : m == Method::kBaseline2
                                    ? BaselineKind::kOfflineOnDiff
                                    : BaselineKind::kInitThenCount;
      s = RunBaseline(kind, config, stream, t0, /*sample=*/true, collect);
    }
    if (!s.ok()) {
      py::gil_scoped_acquire acquire;
      ThrowIfError(s);
    }
  }
  py::list out;
  for (const StepOutput& step : steps) {
    py::dict d;
    d["t"] = step.time;
    d["points"] = ToArray(step.points);
    d["leaves"] = step.subtree.leaves.size();
    d["root_count"] = step.node_counts.at(NodeId::Root());
    out.append(d);
  }
  return out;
}

class PyCounter {
 public:
  PyCounter(const std::string& kind, double epsilon, uint64_t seed)
      : counter_(ValueOrThrow(
            Counter::Create(ValueOrThrow(CounterKind::Parse(kind)), epsilon))),
        noise_(seed) {}

  double Feed(double x) { return ValueOrThrow(counter_.Feed(x, noise_)); }
  int64_t time() const { return counter_.time(); }

 private:
  Counter counter_;
  SeededNoise noise_;
};

}  // namespace
}  // namespace dpstream

PYBIND11_MODULE(_dpstream, m) {
  using namespace dpstream;
  m.doc() = "Differentially private synthetic data for turnstile streams";

  m.def("generate", &PyGenerate, py::arg("spec_json"),
        "Simulated event stream as (t, x, y, w) tuples.");
  m.def("run_experiment", &PyRunExperiment, py::arg("config_json"),
        "Runs an experiment config and returns the metric rows.");
  m.def("synthesize", &PySynthesize, py::arg("events"),
        py::arg("method") = "phdstream", py::arg("epsilon") = 0.5,
        py::arg("theta") = 0.0, py::arg("counter") = "simple",
        py::arg("beta") = 2, py::arg("max_depth") = 20, py::arg("t0") = 1,
        py::arg("seed") = 0,
        "Synthetic points for every step of an event stream on [0,1]^2.");
  m.def(
      "relative_error",
      [](const std::vector<double>& true_counts,
         const std::vector<double>& synth_counts, double total_true) {
        return ValueOrThrow(
            RelativeError(true_counts, synth_counts, total_true));
      },
      py::arg("true_counts"), py::arg("synth_counts"), py::arg("total_true"));
  m.def(
      "privtree_scales",
      [](double epsilon, double theta, int fanout) {
        PrivTreeParams p =
            ValueOrThrow(PrivTreeParams::Create(epsilon, theta, fanout));
        return py::make_tuple(p.lambda(), p.delta());
      },
      py::arg("epsilon"), py::arg("theta"), py::arg("fanout"),
      "(lambda, delta) of PrivTree for the given budget and fanout.");
  m.def(
      "counter_error_std",
      [](const std::string& kind, double epsilon, int64_t t) {
        return CounterErrorStd(ValueOrThrow(CounterKind::Parse(kind)),
                               epsilon, t);
      },
      py::arg("kind"), py::arg("epsilon"), py::arg("t"));

  py::class_<PyCounter>(m, "Counter")
      .def(py::init<const std::string&, double, uint64_t>(), py::arg("kind"),
           py::arg("epsilon"), py::arg("seed") = 0)
      .def("feed", &PyCounter::Feed, py::arg("x"))
      .def_property_readonly("time", &PyCounter::time);
}
