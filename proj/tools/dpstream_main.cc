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

// Command-line front end: run experiments, generate streams, score dumps.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "dpstream/harness.h"
#include "json.hpp"

namespace {

using dpstream::ExperimentConfig;

constexpr int kConfigError = 1;
constexpr int kDataError = 2;

int ExitCode(const absl::Status& status) {
  if (status.ok()) return 0;
  std::cerr << "error: " << status << "\n";
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
      return kConfigError;
    default:
      return kDataError;
  }
}

absl::Status ApplyOverrides(ExperimentConfig& config,
                            const std::optional<double>& epsilon,
                            const std::optional<double>& theta,
                            const std::optional<int64_t>& t0,
                            const std::string& method,
                            const std::string& counter,
                            const std::string& seeds, const std::string& out) {
  if (epsilon) config.epsilon = *epsilon;
  if (theta) config.theta = *theta;
  if (t0) config.t0 = *t0;
  if (!method.empty()) {
    config.methods.clear();
    for (absl::string_view m : absl::StrSplit(method, ',', absl::SkipEmpty())) {
      absl::StatusOr<dpstream::Method> parsed = dpstream::ParseMethod(m);
      if (!parsed.ok()) return parsed.status();
      config.methods.push_back(*parsed);
    }
  }
  if (!counter.empty()) {
    absl::StatusOr<dpstream::CounterKind> kind =
        dpstream::CounterKind::Parse(counter);
    if (!kind.ok()) return kind.status();
    config.counter = *kind;
  }
  if (!seeds.empty()) {
    config.seeds.clear();
    for (absl::string_view s : absl::StrSplit(seeds, ',', absl::SkipEmpty())) {
      uint64_t seed;
      if (!absl::SimpleAtoi(s, &seed)) {
        return absl::InvalidArgumentError(
            absl::StrCat("Bad seed '", s, "'"));
      }
      config.seeds.push_back(seed);
    }
  }
  if (!out.empty()) config.out_dir = out;
  return absl::OkStatus();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic data for streams of points"};
  app.require_subcommand(1);

  // run
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  std::string config_path, method, counter, seeds, out_dir;
  std::optional<double> epsilon, theta;
  std::optional<int64_t> t0;
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--epsilon", epsilon, "Per-step privacy budget");
  run->add_option("--theta", theta, "PrivTree split threshold");
  run->add_option("--t0", t0, "Initialization time (0 disables)");
  run->add_option("--method", method,
                  "phdstream|baseline1|baseline2|baseline3 (comma list)");
  run->add_option("--counter", counter,
                  "simple|block:B|binarytree:T");
  run->add_option("--seed", seeds, "Comma-separated seeds");
  run->add_option("--out", out_dir, "Output directory");

  // generate
  CLI::App* generate =
      app.add_subcommand("generate", "Write a simulated event stream");
  std::string spec_path, events_out;
  generate->add_option("--spec", spec_path, "JSON generator spec")
      ->required();
  generate->add_option("--out", events_out, "Output events CSV")->required();

  // eval
  CLI::App* eval =
      app.add_subcommand("eval", "Score synthetic point dumps");
  std::string true_path, synth_dir, queries = "small,medium,large";
  uint64_t query_seed = 0;
  int64_t eval_t0 = 1;
  eval->add_option("--true", true_path, "True events CSV")->required();
  eval->add_option("--synth", synth_dir, "Directory of points_<t>.csv")
      ->required();
  eval->add_option("--queries", queries, "Comma-separated query classes");
  eval->add_option("--seed", query_seed, "Query seed");
  eval->add_option("--t0", eval_t0, "Initialization time used for the run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (run->parsed()) {
    absl::StatusOr<ExperimentConfig> config =
        ExperimentConfig::FromFile(config_path);
    if (!config.ok()) return ExitCode(config.status());
    if (absl::Status s = ApplyOverrides(*config, epsilon, theta, t0, method,
                                        counter, seeds, out_dir);
        !s.ok()) {
      return ExitCode(s);
    }
    return ExitCode(dpstream::RunExperimentToDir(*config));
  }

  if (generate->parsed()) {
    std::ifstream in(spec_path);
    if (!in) {
      return ExitCode(absl::NotFoundError("Cannot open " + spec_path));
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false, true);
    if (j.is_discarded()) {
      return ExitCode(
          absl::InvalidArgumentError(spec_path + ": not valid JSON"));
    }
    absl::StatusOr<dpstream::GeneratorSpec> spec =
        dpstream::GeneratorSpec::FromJson(j);
    if (!spec.ok()) return ExitCode(spec.status());
    absl::StatusOr<dpstream::DiffStream> stream = dpstream::Generate(*spec);
    if (!stream.ok()) return ExitCode(stream.status());
    std::ofstream out(events_out, std::ios::binary);
    if (!out) {
      return ExitCode(absl::InvalidArgumentError("Cannot write " + events_out));
    }
    dpstream::WriteEventsCsv(*stream, out);
    return 0;
  }

  // eval
  std::vector<dpstream::QueryClass> classes;
  for (absl::string_view q : absl::StrSplit(queries, ',', absl::SkipEmpty())) {
    absl::StatusOr<dpstream::QueryClass> cls = dpstream::ParseQueryClass(q);
    if (!cls.ok()) return ExitCode(cls.status());
    classes.push_back(*cls);
  }
  absl::StatusOr<dpstream::DiffStream> truth =
      dpstream::ReadEventsCsv(true_path, dpstream::Domain::UnitCube(2));
  if (!truth.ok()) return ExitCode(truth.status());
  absl::StatusOr<std::vector<dpstream::EvalRow>> rows = dpstream::EvaluateDumps(
      *truth, eval_t0, synth_dir, classes, query_seed);
  if (!rows.ok()) return ExitCode(rows.status());
  std::cout << "t,query_class,rel_error,true_count,synth_count\n";
  for (const dpstream::EvalRow& r : *rows) {
    std::cout << absl::StrFormat("%d,%s,%.10g,%.10g,%.10g\n", r.t,
                                 dpstream::ToString(r.query_class),
                                 r.rel_error, r.true_count, r.synth_count);
  }
  return 0;
}
