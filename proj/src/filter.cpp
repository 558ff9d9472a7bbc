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

#include "mef/filter.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

#include "mef/se23.hpp"

namespace mef::filter {

using se23::adjoint;
using se23::op_F;
using se23::op_G;
using se23::proj_sym;
using se23::skew;

namespace {

// Solves P mu = rhs for SPD P. Failure of the factorization means P has
// lost positive definiteness, which the filter treats as divergence.
Vec9 solve_spd(const Mat9& P, const Vec9& rhs, double t) {
  Eigen::LLT<Mat9> llt(P);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("information matrix is not positive definite", t);
  }
  return llt.solve(rhs);
}

bool is_spd(const Mat9& P) {
  return Eigen::LLT<Mat9>(P).info() == Eigen::Success;
}

}  // namespace

Mat3 NoiseGains::measurement_weight() const {
  if (std::abs(D.determinant()) < 1e-12) {
    throw std::invalid_argument("NoiseGains: D must be invertible");
  }
  const Mat3 Dinv = D.inverse();
  return Dinv.transpose() * Dinv;
}

AlgebraVector group_velocity(const GroupElement& g_hat, const ImuSample& imu) {
  return se23::make_algebra(imu.u_omega, imu.u_a,
                            g_hat.R.transpose() * g_hat.v);
}

Vec3 predict_measurement(const GroupElement& g_hat, const Vec3& landmark) {
  return g_hat.R.transpose() * (landmark - g_hat.x);
}

Mat9 state_matrix(const ImuSample& imu) {
  const Mat3 wo = skew(imu.u_omega);
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(0, 0) = -wo;
  a.block<3, 3>(3, 0) = -skew(imu.u_a);
  a.block<3, 3>(3, 3) = -wo;
  a.block<3, 3>(6, 3) = Mat3::Identity();
  a.block<3, 3>(6, 6) = -wo;
  return a;
}

Mat96 noise_input_matrix(const NoiseGains& gains) {
  Mat96 b = Mat96::Zero();
  b.block<3, 3>(0, 0) = -gains.B_omega;
  b.block<3, 3>(3, 3) = -gains.B_a;
  return b;
}

Mat9 noise_input_squared(const NoiseGains& gains) {
  Mat9 bbt = Mat9::Zero();
  bbt.block<3, 3>(0, 0) = gains.B_omega * gains.B_omega.transpose();
  bbt.block<3, 3>(3, 3) = gains.B_a * gains.B_a.transpose();
  return bbt;
}

Vec9 residual(const GroupElement& g_hat, const LandmarkBatch& batch,
              const LandmarkMap& map, const NoiseGains& gains) {
  const Mat3 weight = gains.measurement_weight();
  Vec9 r = Vec9::Zero();
  for (const auto& obs : batch.observations) {
    const Vec3 y_hat = predict_measurement(g_hat, map.at(obs.index));
    r += kResidualSign * op_F(y_hat).transpose() * (weight * (obs.y - y_hat));
  }
  return r;
}

Mat9 measurement_curvature(const GroupElement& g_hat,
                           const LandmarkBatch& batch, const LandmarkMap& map,
                           const NoiseGains& gains) {
  const Mat3 weight = gains.measurement_weight();
  Mat9 e = Mat9::Zero();
  for (const auto& obs : batch.observations) {
    const Vec3 y_hat = predict_measurement(g_hat, map.at(obs.index));
    const Mat39 f = op_F(y_hat);
    e += -proj_sym(f.transpose() * op_G(weight * (obs.y - y_hat))) +
         f.transpose() * weight * f;
  }
  return proj_sym(e);
}

Mat9 information_rate(const Mat9& P, const Mat9& A, const Mat9& BBt,
                      const Mat9& E, const Vec9& r) {
  const Eigen::FullPivLU<Mat9> lu(P);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("information_rate: P is singular");
  }
  const Vec9 mu = lu.solve(r);
  return -proj_sym(2.0 * P * A - P * adjoint(mu)) + E - P * BBt * P;
}

Mat9 information_rate(const FilterState& state, const ImuSample& imu,
                      const LandmarkBatch& batch, const LandmarkMap& map,
                      const NoiseGains& gains) {
  return information_rate(state.P, state_matrix(imu),
                          noise_input_squared(gains),
                          measurement_curvature(state.g_hat, batch, map, gains),
                          residual(state.g_hat, batch, map, gains));
}

Mat9 gain_rate(const FilterState& state, const ImuSample& imu,
               const LandmarkBatch& batch, const LandmarkMap& map,
               const NoiseGains& gains) {
  Eigen::LLT<Mat9> llt(state.P);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("information matrix is not positive definite",
                          state.t);
  }
  const Mat9 K = llt.solve(Mat9::Identity());
  const Mat9 A = state_matrix(imu);
  const Mat9 E = measurement_curvature(state.g_hat, batch, map, gains);
  const Vec9 r = residual(state.g_hat, batch, map, gains);
  return proj_sym(2.0 * A * K - adjoint(K * r) * K) - K * E * K +
         noise_input_squared(gains);
}

FilterState predict(const FilterState& state, const ImuSample& imu, double dt,
                    const NoiseGains& gains) {
  FilterState next;
  next.g_hat =
      se23::compose(state.g_hat, se23::exp(dt * group_velocity(state.g_hat, imu)));
  const Mat9 A = state_matrix(imu);
  const Mat9 BBt = noise_input_squared(gains);
  next.P = proj_sym(state.P - 2.0 * dt * proj_sym(state.P * A) -
                    dt * state.P * BBt * state.P);
  next.t = state.t + dt;
  return next;
}

FilterState update(const FilterState& state, const LandmarkBatch& batch,
                   const LandmarkMap& map, const NoiseGains& gains) {
  if (batch.observations.empty()) {
    return state;
  }
  const Vec9 r = residual(state.g_hat, batch, map, gains);
  const Mat9 E = measurement_curvature(state.g_hat, batch, map, gains);
  const Vec9 mu = solve_spd(state.P, r, state.t);

  FilterState next;
  next.t = state.t;
  next.P = proj_sym(state.P + gains.alpha * E +
                    gains.alpha * proj_sym(state.P * adjoint(mu)));
  Eigen::LLT<Mat9> llt(next.P);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("landmark update lost positive definiteness",
                          state.t);
  }
  const Vec9 correction = gains.alpha * llt.solve(r);
  next.g_hat = se23::compose(state.g_hat, se23::exp(correction));
  return next;
}

FilterState init(const GroupElement& g0_hat, const Mat9& P0, double t0) {
  if ((P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("init: P0 is not symmetric");
  }
  if (!is_spd(P0)) {
    throw std::invalid_argument("init: P0 is not positive definite");
  }
  return FilterState{g0_hat, P0, t0};
}

}  // namespace mef::filter
