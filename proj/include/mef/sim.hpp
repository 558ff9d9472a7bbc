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

#ifndef MEF_SIM_HPP
#define MEF_SIM_HPP

#include <cstdint>

#include "mef/filter.hpp"
#include "mef/se23.hpp"

namespace mef::sim {

using filter::ImuSample;
using filter::LandmarkBatch;
using filter::LandmarkMap;
using filter::NoiseGains;
using se23::GroupElement;

/// xoshiro256++ seeded through splitmix64, with a Box-Muller normal
/// transform. Value-semantic; the full stream is a pure function of the
/// seed, so identical seeds produce bit-identical sample sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Standard normal. Box-Muller pairs; the second value of each pair is
  /// cached and returned by the following call.
  double normal();

  Vec3 normal3();

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Constant body-frame angular velocity and linear acceleration from a
/// given initial state.
struct TrajectorySpec {
  GroupElement g0;
  Vec3 omega_body{0, 0, 0};  // rad/s
  Vec3 a_body{0, 0, 0};      // m/s^2
  double duration = 0.0;     // s
};

struct SensorSpec {
  double imu_rate_hz = 1000.0;
  double landmark_rate_hz = 10.0;
  NoiseGains gains;
  LandmarkMap landmarks;
  double dropout = 0.0;  // per-landmark exclusion probability
  std::uint64_t seed = 0;

  /// IMU steps per landmark period; rates must divide evenly.
  int landmark_interval_steps() const;
};

struct GroundTruthSample {
  double t = 0.0;
  GroupElement g;
  Vec3 omega{0, 0, 0};
  Vec3 a{0, 0, 0};
};

GroundTruthSample initial_truth(const TrajectorySpec& spec);

/// Advances the truth one step: rotation by exact exponential, velocity by
/// the midpoint rule on dv/dt = R a, position by the trapezoid rule on
/// dx/dt = v. Per-step error O(dt^3).
GroundTruthSample propagate_truth(const GroundTruthSample& sample,
                                  const TrajectorySpec& spec, double dt);

/// u_omega = omega + B_omega * n, u_a = a + B_a * n, n ~ N(0, I) drawn from
/// the generator (omega noise first, then acceleration noise).
ImuSample sample_imu(const GroundTruthSample& truth, const NoiseGains& gains,
                     Rng& rng);

/// For each landmark in map order: one uniform draw decides inclusion
/// (dropped when below the dropout probability); included landmarks get
/// y = R'(l - x) + D * n with three further normal draws.
LandmarkBatch sample_landmarks(const GroundTruthSample& truth,
                               const SensorSpec& spec, Rng& rng);

}  // namespace mef::sim

#endif  // MEF_SIM_HPP
