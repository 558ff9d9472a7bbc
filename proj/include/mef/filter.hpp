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

#ifndef MEF_FILTER_HPP
#define MEF_FILTER_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mef/se23.hpp"

namespace mef::filter {

using se23::AlgebraVector;
using se23::GroupElement;

/// Sign convention of the innovation residual. Chosen so that a landmark
/// update moves the estimate toward the measurements (a correction must
/// strictly reduce the total squared innovation under exact sensors); the
/// relocalization acceptance test pins this.
inline constexpr double kResidualSign = -1.0;

struct ImuSample {
  double t = 0.0;       // seconds
  Vec3 u_omega{0, 0, 0};  // rad/s, body frame
  Vec3 u_a{0, 0, 0};      // m/s^2, body frame
};

struct LandmarkObservation {
  std::size_t index = 0;  // into the landmark map
  Vec3 y{0, 0, 0};        // meters, body frame
};

struct LandmarkBatch {
  double t = 0.0;
  std::vector<LandmarkObservation> observations;
};

/// Positions of the fixed landmarks, inertial frame.
using LandmarkMap = std::vector<Vec3>;

/// Disturbance gains of the models: B_omega/B_a scale the IMU error inputs,
/// D scales the landmark error (must be invertible), alpha weights the
/// discrete landmark update against the IMU rate.
struct NoiseGains {
  Mat3 B_omega = Mat3::Zero();
  Mat3 B_a = Mat3::Zero();
  Mat3 D = Mat3::Identity();
  double alpha = 0.1;

  /// (D^-1)' * D^-1, the weight applied to landmark innovations.
  Mat3 measurement_weight() const;
};

struct FilterState {
  GroupElement g_hat;
  Mat9 P = Mat9::Identity();  // information matrix, inverse of the gain
  double t = 0.0;
};

/// Thrown when a landmark update destroys positive definiteness of P.
/// This signals filter divergence and is deliberately not repaired.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_ = 0.0;
};

/// The modeled group velocity (u_omega, u_a, R'v) at the estimate, with
/// measured inputs substituted.
AlgebraVector group_velocity(const GroupElement& g_hat, const ImuSample& imu);

/// Predicted body-frame landmark position R'(l - x).
Vec3 predict_measurement(const GroupElement& g_hat, const Vec3& landmark);

/// 9x9 state operator driving the information flow:
/// [[-u_ox, 0, 0], [-u_ax, -u_ox, 0], [0, I, -u_ox]].
Mat9 state_matrix(const ImuSample& imu);

/// 9x6 disturbance input matrix [[-B_omega, 0], [0, -B_a], [0, 0]]. Only
/// B*B' enters the filter, so the overall sign is immaterial.
Mat96 noise_input_matrix(const NoiseGains& gains);

/// B*B' = blkdiag(B_omega*B_omega', B_a*B_a', 0).
Mat9 noise_input_squared(const NoiseGains& gains);

/// Innovation residual, summed over the observations present in the batch:
/// kResidualSign * sum_i F(y_hat_i)' * W * (y_i - y_hat_i) with
/// W the measurement weight. Empty batch gives the zero vector.
Vec9 residual(const GroupElement& g_hat, const LandmarkBatch& batch,
              const LandmarkMap& map, const NoiseGains& gains);

/// Symmetric measurement curvature:
/// sum_i [ -proj_sym(F(y_hat_i)' G(W (y_i - y_hat_i))) + F(y_hat_i)' W F(y_hat_i) ].
/// Reduces to the positive semidefinite quadratic term at zero innovation.
Mat9 measurement_curvature(const GroupElement& g_hat,
                           const LandmarkBatch& batch, const LandmarkMap& map,
                           const NoiseGains& gains);

/// Right-hand side of the information flow assembled from its pieces:
/// dP/dt = -proj_sym(2 P A - P ad(P^-1 r)) + E - P BB' P.
Mat9 information_rate(const Mat9& P, const Mat9& A, const Mat9& BBt,
                      const Mat9& E, const Vec9& r);

/// dP/dt evaluated at a filter state. Test/analysis path only; the runtime
/// loop uses the discrete predict/update steps.
Mat9 information_rate(const FilterState& state, const ImuSample& imu,
                      const LandmarkBatch& batch, const LandmarkMap& map,
                      const NoiseGains& gains);

/// Companion flow of the gain K = P^-1:
/// dK/dt = proj_sym(2 A K - ad(K r) K) - K E K + BB'.
Mat9 gain_rate(const FilterState& state, const ImuSample& imu,
               const LandmarkBatch& batch, const LandmarkMap& map,
               const NoiseGains& gains);

/// One IMU propagation step:
///   g  <- g * exp(dt * group_velocity)
///   P  <- P - 2 dt proj_sym(P A) - dt P BB' P   (re-symmetrized)
FilterState predict(const FilterState& state, const ImuSample& imu, double dt,
                    const NoiseGains& gains);

/// Discrete landmark update. P is corrected first and the state correction
/// uses the updated information matrix:
///   P  <- P + alpha E + alpha proj_sym(P ad(P^-1 r))
///   g  <- g * exp(alpha * P_new^-1 r)
/// An empty batch leaves the state untouched. Throws DivergenceError if the
/// updated P is not positive definite.
FilterState update(const FilterState& state, const LandmarkBatch& batch,
                   const LandmarkMap& map, const NoiseGains& gains);

/// Initial state from an estimate, an SPD information matrix, and a time.
FilterState init(const GroupElement& g0_hat, const Mat9& P0, double t0);

}  // namespace mef::filter

#endif  // MEF_FILTER_HPP
