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

#include "mef/harness.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mef::harness {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_numbers(const std::string& value,
                                  const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ConfigError("empty number in value for '" + key + "'");
    }
    std::size_t consumed = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(item, &consumed);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "' for '" + key + "'");
    }
    if (consumed != item.size()) {
      throw ConfigError("trailing characters in number '" + item + "' for '" +
                        key + "'");
    }
    out.push_back(parsed);
  }
  if (out.empty()) {
    throw ConfigError("no values given for '" + key + "'");
  }
  return out;
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
  const auto nums = parse_numbers(value, key);
  if (nums.size() != 3) {
    throw ConfigError("'" + key + "' needs 3 values, got " +
                      std::to_string(nums.size()));
  }
  return {nums[0], nums[1], nums[2]};
}

Vec9 parse_vec9(const std::string& value, const std::string& key) {
  const auto nums = parse_numbers(value, key);
  if (nums.size() != 9) {
    throw ConfigError("'" + key + "' needs 9 values, got " +
                      std::to_string(nums.size()));
  }
  Vec9 v;
  for (int i = 0; i < 9; ++i) {
    v(i) = nums[i];
  }
  return v;
}

// 1 value: scalar * I; 3 values: diagonal; 9 values: row-major.
Mat3 parse_gain_matrix(const std::string& value, const std::string& key) {
  const auto nums = parse_numbers(value, key);
  if (nums.size() == 1) {
    return nums[0] * Mat3::Identity();
  }
  if (nums.size() == 3) {
    return Vec3(nums[0], nums[1], nums[2]).asDiagonal();
  }
  if (nums.size() == 9) {
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m(r, c) = nums[3 * r + c];
      }
    }
    return m;
  }
  throw ConfigError("'" + key + "' needs 1, 3 or 9 values");
}

filter::LandmarkMap parse_landmarks(const std::string& value) {
  filter::LandmarkMap map;
  std::stringstream ss(value);
  std::string triple;
  while (std::getline(ss, triple, ';')) {
    triple = trim(triple);
    if (triple.empty()) {
      continue;
    }
    map.push_back(parse_vec3(triple, "landmarks"));
  }
  if (map.empty()) {
    throw ConfigError("'landmarks' needs at least one triple");
  }
  return map;
}

double innovation_squared(const GroupElement& g_hat,
                          const filter::LandmarkBatch& batch,
                          const filter::LandmarkMap& map) {
  double total = 0.0;
  for (const auto& obs : batch.observations) {
    total += (obs.y - filter::predict_measurement(g_hat, map.at(obs.index)))
                 .squaredNorm();
  }
  return total;
}

void append_number(std::string& out, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  out += buf;
}

}  // namespace

void RunConfig::validate() const {
  if (!(trajectory.duration > 0.0)) {
    throw ConfigError("duration_s must be positive");
  }
  sensors.landmark_interval_steps();  // checks the rate relation
  if (sensors.landmarks.empty()) {
    throw ConfigError("at least one landmark is required");
  }
  if (sensors.dropout < 0.0 || sensors.dropout > 1.0) {
    throw ConfigError("dropout must lie in [0, 1]");
  }
  if (!(sensors.gains.alpha > 0.0)) {
    throw ConfigError("alpha must be positive");
  }
  if (std::abs(sensors.gains.D.determinant()) < 1e-12) {
    throw ConfigError("d_gain must be invertible");
  }
  if ((p0_diag.array() <= 0.0).any()) {
    throw ConfigError("p0_diag entries must be positive");
  }
  if (trials < 1) {
    throw ConfigError("trials must be at least 1");
  }
  if (noise_scale < 0.0) {
    throw ConfigError("noise_scale must be non-negative");
  }
}

double translation_error(const GroupElement& g_hat,
                         const GroupElement& g_true) {
  return (g_hat.x - g_true.x).norm();
}

double rotation_error(const GroupElement& g_hat, const GroupElement& g_true) {
  const double c = ((g_hat.R.transpose() * g_true.R).trace() - 1.0) / 2.0;
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

double velocity_error(const GroupElement& g_hat, const GroupElement& g_true) {
  return (g_hat.v - g_true.v).norm();
}

TrialResult run_trial(const RunConfig& config, std::uint64_t seed) {
  config.validate();

  sim::SensorSpec noisy = config.sensors;
  noisy.gains.B_omega *= config.noise_scale;
  noisy.gains.B_a *= config.noise_scale;
  noisy.gains.D *= config.noise_scale;

  const filter::NoiseGains& gains = config.sensors.gains;
  const filter::LandmarkMap& map = config.sensors.landmarks;
  const double dt = 1.0 / config.sensors.imu_rate_hz;
  const int interval = config.sensors.landmark_interval_steps();
  const long steps =
      std::lround(config.trajectory.duration * config.sensors.imu_rate_hz);

  sim::Rng rng(seed);
  sim::GroundTruthSample truth = sim::initial_truth(config.trajectory);
  filter::FilterState state =
      filter::init(config.trajectory.g0 * se23::exp(config.init_offset),
                   Mat9(config.p0_diag.asDiagonal()), 0.0);

  TrialResult result;
  result.trace.reserve(static_cast<std::size_t>(steps));
  result.min_p_eigenvalue = std::numeric_limits<double>::infinity();

  {
    // Virtual noise-free innovation of the initial estimate.
    filter::LandmarkBatch ideal;
    ideal.t = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) {
      ideal.observations.push_back(
          {i, filter::predict_measurement(truth.g, map[i])});
    }
    result.innovations.push_back(
        {0.0, innovation_squared(state.g_hat, ideal, map)});
  }

  double previous_imu_t = 0.0;
  bool have_previous_imu = false;
  for (long k = 0; k < steps; ++k) {
    const filter::ImuSample imu = sim::sample_imu(truth, noisy.gains, rng);
    truth = sim::propagate_truth(truth, config.trajectory, dt);
    // Step size from consecutive sample timestamps; the configured rate is
    // the fallback for the first sample or a non-advancing stamp.
    const double step = (have_previous_imu && imu.t > previous_imu_t)
                            ? imu.t - previous_imu_t
                            : dt;
    previous_imu_t = imu.t;
    have_previous_imu = true;
    state = filter::predict(state, imu, step, gains);

    if ((k + 1) % interval == 0) {
      const filter::LandmarkBatch batch =
          sim::sample_landmarks(truth, noisy, rng);
      result.innovations.push_back(
          {truth.t, innovation_squared(state.g_hat, batch, map)});
      state = filter::update(state, batch, map, gains);
      const Eigen::SelfAdjointEigenSolver<Mat9> eig(state.P,
                                                    Eigen::EigenvaluesOnly);
      result.min_p_eigenvalue =
          std::min(result.min_p_eigenvalue, eig.eigenvalues().minCoeff());
    }

    result.max_p_asymmetry =
        std::max(result.max_p_asymmetry,
                 (state.P - state.P.transpose()).cwiseAbs().maxCoeff());
    result.max_ortho_error =
        std::max(result.max_ortho_error, state.g_hat.orthonormality_error());
    // The update step raises divergence itself; the predict step has no
    // error path, so a loss of positive definiteness there surfaces here.
    if (!state.P.allFinite() ||
        Eigen::LLT<Mat9>(state.P).info() != Eigen::Success) {
      result.p_positive_definite = false;
      throw filter::DivergenceError(
          "information matrix lost positive definiteness", truth.t);
    }

    result.trace.push_back({truth.t, translation_error(state.g_hat, truth.g),
                            rotation_error(state.g_hat, truth.g),
                            velocity_error(state.g_hat, truth.g)});
  }
  return result;
}

MonteCarloResult run_monte_carlo(const RunConfig& config, int trials) {
  if (trials < 1) {
    throw ConfigError("trials must be at least 1");
  }
  MonteCarloResult result;
  std::vector<ErrorTrace> traces;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t seed = config.sensors.seed + static_cast<std::uint64_t>(i);
    try {
      TrialResult trial = run_trial(config, seed);
      traces.push_back(trial.trace);
      result.trials.push_back(std::move(trial));
    } catch (const filter::DivergenceError& err) {
      result.flagged.push_back({i, seed, err.time(), err.what()});
    }
  }
  result.aggregate = aggregate_traces(traces);
  return result;
}

AggregateTrace aggregate_traces(const std::vector<ErrorTrace>& traces) {
  AggregateTrace aggregate;
  if (traces.empty()) {
    return aggregate;
  }
  const std::size_t length = traces.front().size();
  for (const auto& trace : traces) {
    if (trace.size() != length) {
      throw std::invalid_argument("aggregate_traces: traces differ in length");
    }
  }
  aggregate.reserve(length);
  const double n = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < length; ++k) {
    AggregateRecord rec;
    rec.t = traces.front()[k].t;
    double sums[3] = {0, 0, 0};
    for (const auto& trace : traces) {
      sums[0] += trace[k].translation;
      sums[1] += trace[k].rotation;
      sums[2] += trace[k].velocity;
    }
    rec.translation_mean = sums[0] / n;
    rec.rotation_mean = sums[1] / n;
    rec.velocity_mean = sums[2] / n;
    double sq[3] = {0, 0, 0};
    for (const auto& trace : traces) {
      const double d0 = trace[k].translation - rec.translation_mean;
      const double d1 = trace[k].rotation - rec.rotation_mean;
      const double d2 = trace[k].velocity - rec.velocity_mean;
      sq[0] += d0 * d0;
      sq[1] += d1 * d1;
      sq[2] += d2 * d2;
    }
    rec.translation_std = std::sqrt(sq[0] / n);
    rec.rotation_std = std::sqrt(sq[1] / n);
    rec.velocity_std = std::sqrt(sq[2] / n);
    aggregate.push_back(rec);
  }
  return aggregate;
}

ConvergedMeans converged_means(const ErrorTrace& trace, double fraction) {
  ConvergedMeans means;
  if (trace.empty()) {
    return means;
  }
  const std::size_t start =
      trace.size() - static_cast<std::size_t>(
                         std::floor(fraction * static_cast<double>(trace.size())));
  const std::size_t count = trace.size() - start;
  if (count == 0) {
    return means;
  }
  for (std::size_t k = start; k < trace.size(); ++k) {
    means.translation += trace[k].translation;
    means.rotation += trace[k].rotation;
    means.velocity += trace[k].velocity;
  }
  means.translation /= static_cast<double>(count);
  means.rotation /= static_cast<double>(count);
  means.velocity /= static_cast<double>(count);
  return means;
}

std::string to_csv(const ErrorTrace& trace) {
  std::string out = "t,trans_err_m,rot_err_rad,vel_err_mps\n";
  for (const auto& rec : trace) {
    append_number(out, rec.t);
    out += ',';
    append_number(out, rec.translation);
    out += ',';
    append_number(out, rec.rotation);
    out += ',';
    append_number(out, rec.velocity);
    out += '\n';
  }
  return out;
}

std::string to_csv(const AggregateTrace& aggregate) {
  std::string out =
      "t,trans_err_m_mean,trans_err_m_std,rot_err_rad_mean,rot_err_rad_std,"
      "vel_err_mps_mean,vel_err_mps_std\n";
  for (const auto& rec : aggregate) {
    append_number(out, rec.t);
    out += ',';
    append_number(out, rec.translation_mean);
    out += ',';
    append_number(out, rec.translation_std);
    out += ',';
    append_number(out, rec.rotation_mean);
    out += ',';
    append_number(out, rec.rotation_std);
    out += ',';
    append_number(out, rec.velocity_mean);
    out += ',';
    append_number(out, rec.velocity_std);
    out += '\n';
  }
  return out;
}

namespace {

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

}  // namespace

void write_csv(const ErrorTrace& trace, const std::string& path) {
  write_text(to_csv(trace), path);
}

void write_csv(const AggregateTrace& aggregate, const std::string& path) {
  write_text(to_csv(aggregate), path);
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  // Defaults: the reference scenario rates and gains, the default landmark
  // map, a gentle turn at 1 m/s, and an estimate displaced by 3.8 m and
  // 0.2 rad.
  config.trajectory.g0 = GroupElement::identity();
  config.trajectory.g0.v = Vec3(1.0, 0.0, 0.0);
  config.trajectory.omega_body = Vec3(0.0, 0.0, 0.3);
  config.trajectory.a_body = Vec3::Zero();
  config.trajectory.duration = 20.0;
  config.sensors.imu_rate_hz = 1000.0;
  config.sensors.landmark_rate_hz = 10.0;
  config.sensors.gains.B_omega = 0.1 * Mat3::Identity();
  config.sensors.gains.B_a = 0.1 * Mat3::Identity();
  config.sensors.gains.D = 0.5 * Mat3::Identity();
  config.sensors.gains.alpha = 0.1;
  config.sensors.landmarks = {Vec3(10, 0, 0), Vec3(0, 10, 0), Vec3(0, 0, 10),
                              Vec3(10, 10, 10)};
  config.sensors.dropout = 0.0;
  config.sensors.seed = 0;
  config.init_offset << 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 3.787324880839, -0.38,
      0.0;
  config.p0_diag << 1e-3, 1e-3, 1e-3, 3, 3, 3, 5, 5, 5;

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) {
      line.erase(comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(line_number) +
                        ": empty key or value");
    }

    if (key == "imu_rate_hz") {
      config.sensors.imu_rate_hz = parse_numbers(value, key).at(0);
    } else if (key == "landmark_rate_hz") {
      config.sensors.landmark_rate_hz = parse_numbers(value, key).at(0);
    } else if (key == "duration_s") {
      config.trajectory.duration = parse_numbers(value, key).at(0);
    } else if (key == "b_omega") {
      config.sensors.gains.B_omega = parse_gain_matrix(value, key);
    } else if (key == "b_a") {
      config.sensors.gains.B_a = parse_gain_matrix(value, key);
    } else if (key == "d_gain") {
      config.sensors.gains.D = parse_gain_matrix(value, key);
    } else if (key == "alpha") {
      config.sensors.gains.alpha = parse_numbers(value, key).at(0);
    } else if (key == "p0_diag") {
      config.p0_diag = parse_vec9(value, key);
    } else if (key == "landmarks") {
      config.sensors.landmarks = parse_landmarks(value);
    } else if (key == "omega_body") {
      config.trajectory.omega_body = parse_vec3(value, key);
    } else if (key == "a_body") {
      config.trajectory.a_body = parse_vec3(value, key);
    } else if (key == "v0") {
      config.trajectory.g0.v = parse_vec3(value, key);
    } else if (key == "init_offset") {
      config.init_offset = parse_vec9(value, key);
    } else if (key == "seed") {
      try {
        config.sensors.seed = std::stoull(trim(value));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse seed '" + value + "'");
      }
    } else if (key == "trials") {
      const double n = parse_numbers(value, key).at(0);
      config.trials = static_cast<int>(n);
      if (config.trials != n) {
        throw ConfigError("trials must be an integer");
      }
    } else if (key == "dropout") {
      config.sensors.dropout = parse_numbers(value, key).at(0);
    } else if (key == "noise_scale") {
      config.noise_scale = parse_numbers(value, key).at(0);
    } else {
      throw ConfigError("line " + std::to_string(line_number) +
                        ": unknown key '" + key + "'");
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path + "'");
  }
  return parse_config(in);
}

}  // namespace mef::harness
