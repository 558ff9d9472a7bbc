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

#ifndef MEF_HARNESS_HPP
#define MEF_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mef/filter.hpp"
#include "mef/se23.hpp"
#include "mef/sim.hpp"

namespace mef::harness {

using se23::GroupElement;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full description of a simulation run. Loadable from a flat key = value
/// config file; see parse_config for the key set.
struct RunConfig {
  sim::TrajectorySpec trajectory;
  sim::SensorSpec sensors;
  Vec9 init_offset = Vec9::Zero();  // estimate starts at g0 * exp(init_offset)
  Vec9 p0_diag = Vec9::Ones();
  int trials = 1;
  std::string output_path;
  // Scales the *simulated* sensor noise only; the filter keeps the
  // configured gains as its cost weights. 0 gives exact sensors.
  double noise_scale = 1.0;

  void validate() const;
};

struct ErrorRecord {
  double t = 0.0;
  double translation = 0.0;  // m
  double rotation = 0.0;     // rad
  double velocity = 0.0;     // m/s
};

using ErrorTrace = std::vector<ErrorRecord>;

struct InnovationRecord {
  double t = 0.0;
  double squared_sum = 0.0;  // sum_i |y_i - y_hat_i|^2 before the update
};

/// Per-trial output: the error trace plus structural diagnostics gathered
/// at every IMU step. innovations[0] is the virtual (noise-free) innovation
/// of the initial estimate at t0; later entries precede each update.
struct TrialResult {
  ErrorTrace trace;
  std::vector<InnovationRecord> innovations;
  double max_p_asymmetry = 0.0;   // max |P - P'| entry over the run
  double max_ortho_error = 0.0;   // max |R'R - I|_F over the run
  double min_p_eigenvalue = 0.0;  // smallest eigenvalue seen at update steps
  bool p_positive_definite = true;  // Cholesky succeeded at every step
};

struct AggregateRecord {
  double t = 0.0;
  double translation_mean = 0.0, translation_std = 0.0;
  double rotation_mean = 0.0, rotation_std = 0.0;
  double velocity_mean = 0.0, velocity_std = 0.0;
};

using AggregateTrace = std::vector<AggregateRecord>;

struct FlaggedTrial {
  int index = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  std::string reason;
};

struct MonteCarloResult {
  std::vector<TrialResult> trials;   // completed trials, in index order
  AggregateTrace aggregate;          // over completed trials
  std::vector<FlaggedTrial> flagged;  // diverged trials, excluded above
};

double translation_error(const GroupElement& g_hat, const GroupElement& g_true);

/// Geodesic angle between the rotation blocks, in [0, pi].
double rotation_error(const GroupElement& g_hat, const GroupElement& g_true);

double velocity_error(const GroupElement& g_hat, const GroupElement& g_true);

/// Runs one simulation: truth propagation and noisy IMU at the IMU rate,
/// landmark batches (after the enclosing predict) at the landmark rate,
/// errors recorded at every IMU step. Noise streams are a pure function of
/// the seed. Throws filter::DivergenceError with the failing timestamp.
TrialResult run_trial(const RunConfig& config, std::uint64_t seed);

/// Runs `trials` independent trials with seeds base_seed, base_seed+1, ...
/// (the generator remixes seeds, so consecutive values are independent
/// streams). Divergent trials are flagged, not fatal.
MonteCarloResult run_monte_carlo(const RunConfig& config, int trials);

/// Per-step mean/std reduction across traces; all traces must share length
/// and timestamps. Order of the input does not affect the result.
AggregateTrace aggregate_traces(const std::vector<ErrorTrace>& traces);

/// Mean of a metric over the final portion of the run (default: last half),
/// discarding the transient.
struct ConvergedMeans {
  double translation = 0.0;
  double rotation = 0.0;
  double velocity = 0.0;
};
ConvergedMeans converged_means(const ErrorTrace& trace, double fraction = 0.5);

std::string to_csv(const ErrorTrace& trace);
std::string to_csv(const AggregateTrace& aggregate);
void write_csv(const ErrorTrace& trace, const std::string& path);
void write_csv(const AggregateTrace& aggregate, const std::string& path);

/// Parses the flat key = value format ('#' starts a comment; vectors are
/// comma-separated; landmarks are semicolon-separated triples). Keys:
///   imu_rate_hz, landmark_rate_hz, duration_s, b_omega, b_a, d_gain,
///   alpha, p0_diag, landmarks, omega_body, a_body, v0, init_offset,
///   seed, trials, dropout, noise_scale
/// Matrix-valued gains accept 1 (scalar * I), 3 (diagonal) or 9 (row-major)
/// numbers. Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace mef::harness

#endif  // MEF_HARNESS_HPP
