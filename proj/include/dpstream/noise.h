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

#ifndef DPSTREAM_NOISE_H_
#define DPSTREAM_NOISE_H_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace dpstream {

// What a Laplace draw is spent on. Selection draws drive PrivTree decisions,
// counting draws perturb leaf counts and counters.
enum class NoisePurpose { kSelection = 0, kCounting = 1 };
inline constexpr int kNumNoisePurposes = 2;

// Source of Laplace(scale) draws. Engines never construct their own
// randomness; the caller injects one of the implementations below.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual double Laplace(double scale, NoisePurpose purpose) = 0;
};

// Uniform double in (0, 1) from the top 53 bits of a 64-bit word.
inline double OpenUnitInterval(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform double in [0, 1).
inline double HalfOpenUnitInterval(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Inverse-CDF Laplace(0, 1) sample for u in (0, 1).
double UnitLaplaceFromUniform(double u);

class SeededNoise : public NoiseSource {
 public:
  explicit SeededNoise(uint64_t seed) : engine_(seed) {}
  double Laplace(double scale, NoisePurpose purpose) override;

 private:
  std::mt19937_64 engine_;
};

// Always returns 0. Turns every mechanism into its exact, noise-free trace.
class ZeroNoise : public NoiseSource {
 public:
  double Laplace(double, NoisePurpose) override { return 0.0; }
};

// Unit-scale draws, kept per purpose in draw order.
struct NoiseRecording {
  std::array<std::vector<double>, kNumNoisePurposes> draws;
};

// Forwards unit draws from `inner` and records them.
class RecordingNoise : public NoiseSource {
 public:
  explicit RecordingNoise(NoiseSource& inner) : inner_(inner) {}
  double Laplace(double scale, NoisePurpose purpose) override;
  const NoiseRecording& recording() const { return recording_; }

 private:
  NoiseSource& inner_;
  NoiseRecording recording_;
};

// Replays a recording draw-for-draw, rescaled to the requested scale.
// Reads past the end of a channel return 0 and are counted as overruns.
class ReplayNoise : public NoiseSource {
 public:
  explicit ReplayNoise(NoiseRecording recording)
      : recording_(std::move(recording)) {}
  double Laplace(double scale, NoisePurpose purpose) override;

  int64_t overruns() const { return overruns_; }
  bool exhausted() const;

 private:
  NoiseRecording recording_;
  std::array<size_t, kNumNoisePurposes> next_{};
  int64_t overruns_ = 0;
};

struct NoiseDraw {
  NoisePurpose purpose;
  double scale;
};

// Logs the purpose and scale of every draw before forwarding it.
class AuditingNoise : public NoiseSource {
 public:
  explicit AuditingNoise(NoiseSource& inner) : inner_(inner) {}
  double Laplace(double scale, NoisePurpose purpose) override;

  const std::vector<NoiseDraw>& draws() const { return draws_; }
  void Clear() { draws_.clear(); }

 private:
  NoiseSource& inner_;
  std::vector<NoiseDraw> draws_;
};

}  // namespace dpstream

#endif  // DPSTREAM_NOISE_H_
