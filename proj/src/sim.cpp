// Copyright 2026 The mef-se23 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mef/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mef::sim {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) {
    s = splitmix64(sm);
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] so the log stays finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Vec3 Rng::normal3() {
  Vec3 n;
  n << normal(), normal(), normal();
  return n;
}

int SensorSpec::landmark_interval_steps() const {
  if (!(imu_rate_hz >= landmark_rate_hz) || !(landmark_rate_hz > 0.0)) {
    throw std::invalid_argument(
        "sensor rates must satisfy imu_rate >= landmark_rate > 0");
  }
  const double ratio = imu_rate_hz / landmark_rate_hz;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw std::invalid_argument(
        "imu_rate must be an integer multiple of landmark_rate");
  }
  return static_cast<int>(rounded);
}

GroundTruthSample initial_truth(const TrajectorySpec& spec) {
  return GroundTruthSample{0.0, spec.g0, spec.omega_body, spec.a_body};
}

GroundTruthSample propagate_truth(const GroundTruthSample& sample,
                                  const TrajectorySpec& spec, double dt) {
  const GroupElement& g = sample.g;
  const Mat3 r_half = g.R * se23::exp_so3(0.5 * dt * spec.omega_body);

  GroundTruthSample next;
  next.t = sample.t + dt;
  next.omega = spec.omega_body;
  next.a = spec.a_body;
  next.g.R = g.R * se23::exp_so3(dt * spec.omega_body);
  next.g.v = g.v + dt * (r_half * spec.a_body);
  next.g.x = g.x + 0.5 * dt * (g.v + next.g.v);
  return next;
}

ImuSample sample_imu(const GroundTruthSample& truth, const NoiseGains& gains,
                     Rng& rng) {
  ImuSample s;
  s.t = truth.t;
  s.u_omega = truth.omega + gains.B_omega * rng.normal3();
  s.u_a = truth.a + gains.B_a * rng.normal3();
  return s;
}

LandmarkBatch sample_landmarks(const GroundTruthSample& truth,
                               const SensorSpec& spec, Rng& rng) {
  LandmarkBatch batch;
  batch.t = truth.t;
  for (std::size_t i = 0; i < spec.landmarks.size(); ++i) {
    if (rng.uniform() < spec.dropout) {
      continue;
    }
    const Vec3 ideal =
        truth.g.R.transpose() * (spec.landmarks[i] - truth.g.x);
    batch.observations.push_back({i, ideal + spec.gains.D * rng.normal3()});
  }
  return batch;
}

}  // namespace mef::sim
