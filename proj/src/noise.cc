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

#include "dpstream/noise.h"

#include <cmath>

namespace dpstream {

double UnitLaplaceFromUniform(double u) {
  if (u < 0.5) return std::log(2.0 * u);
  return -std::log(2.0 * (1.0 - u));
}

double SeededNoise::Laplace(double scale, NoisePurpose) {
  return scale * UnitLaplaceFromUniform(OpenUnitInterval(engine_()));
}

double RecordingNoise::Laplace(double scale, NoisePurpose purpose) {
  const double unit = inner_.Laplace(1.0, purpose);
  recording_.draws[static_cast<int>(purpose)].push_back(unit);
  return scale * unit;
}

double ReplayNoise::Laplace(double scale, NoisePurpose purpose) {
  const int channel = static_cast<int>(purpose);
  const std::vector<double>& draws = recording_.draws[channel];
  if (next_[channel] >= draws.size()) {
    ++overruns_;
    return 0.0;
  }
  return scale * draws[next_[channel]++];
}

bool ReplayNoise::exhausted() const {
  for (int c = 0; c < kNumNoisePurposes; ++c) {
    if (next_[c] != recording_.draws[c].size()) return false;
  }
  return true;
}

double AuditingNoise::Laplace(double scale, NoisePurpose purpose) {
  draws_.push_back(NoiseDraw{purpose, scale});
  return inner_.Laplace(scale, purpose);
}

}  // namespace dpstream
