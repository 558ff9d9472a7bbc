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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <random>

#include "mef/filter.hpp"
#include "mef/se23.hpp"

namespace {

using mef::Mat3;
using mef::Mat5;
using mef::Mat9;
using mef::Vec3;
using mef::Vec9;
using namespace mef::filter;
namespace se23 = mef::se23;
using se23::op_F;

std::mt19937 g_rng(98765);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g_rng);
}

Vec3 random_vec3(double scale = 1.0) {
  return {uniform(-scale, scale), uniform(-scale, scale),
          uniform(-scale, scale)};
}

Vec9 random_vec9(double scale = 1.0) {
  Vec9 v;
  for (int i = 0; i < 9; ++i) {
    v(i) = uniform(-scale, scale);
  }
  return v;
}

GroupElement random_group(double angle_scale = 1.0) {
  return se23::exp(se23::make_algebra(random_vec3(angle_scale),
                                      random_vec3(2.0), random_vec3(2.0)));
}

Mat9 random_spd(double scale = 1.0) {
  const Mat9 a = scale * Mat9::Random();
  return a * a.transpose() + 0.5 * Mat9::Identity();
}

NoiseGains reference_gains() {
  NoiseGains gains;
  gains.B_omega = 0.1 * Mat3::Identity();
  gains.B_a = 0.1 * Mat3::Identity();
  gains.D = 0.5 * Mat3::Identity();
  gains.alpha = 0.1;
  return gains;
}

LandmarkMap default_map() {
  return {Vec3(10, 0, 0), Vec3(0, 10, 0), Vec3(0, 0, 10), Vec3(10, 10, 10)};
}

// Noise-free batch seen from pose `g_true`, full map.
LandmarkBatch ideal_batch(const GroupElement& g_true, const LandmarkMap& map,
                          double t = 0.0) {
  LandmarkBatch batch;
  batch.t = t;
  for (std::size_t i = 0; i < map.size(); ++i) {
    batch.observations.push_back({i, predict_measurement(g_true, map[i])});
  }
  return batch;
}

ImuSample random_imu() {
  ImuSample imu;
  imu.u_omega = random_vec3(2.0);
  imu.u_a = random_vec3(2.0);
  return imu;
}

TEST(GroupVelocity, ZeroAtRest) {
  const ImuSample imu;
  EXPECT_TRUE(group_velocity(GroupElement::identity(), imu).isZero(0.0));
}

TEST(GroupVelocity, IdentityRotationPassesVelocityThrough) {
  GroupElement g;
  g.v = Vec3(1, 2, 3);
  const ImuSample imu;
  const Vec9 xi = group_velocity(g, imu);
  EXPECT_TRUE(se23::rotation_part(xi).isZero(0.0));
  EXPECT_TRUE(se23::velocity_part(xi).isZero(0.0));
  EXPECT_EQ(se23::position_part(xi), Vec3(1, 2, 3));
}

TEST(GroupVelocity, WedgeMatchesDirectAssembly) {
  for (int i = 0; i < 200; ++i) {
    const GroupElement g = random_group();
    const ImuSample imu = random_imu();
    Mat5 expected = Mat5::Zero();
    expected.block<3, 3>(0, 0) = se23::skew(imu.u_omega);
    expected.block<3, 1>(0, 3) = imu.u_a;
    expected.block<3, 1>(0, 4) = g.R.transpose() * g.v;
    EXPECT_LT((se23::wedge(group_velocity(g, imu)) - expected).norm(), 1e-14);
  }
}

TEST(PredictMeasurement, IdentityPose) {
  EXPECT_EQ(predict_measurement(GroupElement::identity(), Vec3(1, 0, 0)),
            Vec3(1, 0, 0));
}

TEST(PredictMeasurement, AtLandmarkIsZero) {
  GroupElement g = random_group();
  const Vec3 l = random_vec3(5.0);
  g.x = l;
  EXPECT_LT(predict_measurement(g, l).norm(), 1e-13);
}

TEST(PredictMeasurement, MatchesHomogeneousCoordinates) {
  for (int i = 0; i < 200; ++i) {
    const GroupElement g = random_group();
    const Vec3 l = random_vec3(10.0);
    const mef::Vec5 h = se23::inverse(g).matrix() * se23::bar(l);
    EXPECT_LT((predict_measurement(g, l) - h.head<3>()).norm(), 1e-12);
  }
}

TEST(StateMatrix, ZeroInput) {
  const Mat9 a = state_matrix(ImuSample{});
  Mat9 expected = Mat9::Zero();
  expected.block<3, 3>(6, 3) = Mat3::Identity();
  EXPECT_TRUE(a.isApprox(expected, 0.0));
}

TEST(StateMatrix, GyroOnlyDiagonalBlocks) {
  ImuSample imu;
  imu.u_omega = Vec3(0, 0, 1);
  const Mat9 a = state_matrix(imu);
  const Mat3 expected = -se23::skew(Vec3(0, 0, 1));
  EXPECT_TRUE((a.block<3, 3>(0, 0).isApprox(expected, 0.0)));
  EXPECT_TRUE((a.block<3, 3>(3, 3).isApprox(expected, 0.0)));
  EXPECT_TRUE((a.block<3, 3>(6, 6).isApprox(expected, 0.0)));
  EXPECT_TRUE((a.block<3, 3>(6, 3).isApprox(Mat3::Identity(), 0.0)));
  EXPECT_TRUE((a.block<3, 3>(3, 0).isZero(0.0)));
}

// The state matrix equals the directional-derivative term of the modeled
// velocity minus the adjoint of that velocity; the estimate-dependent
// blocks cancel exactly, leaving a matrix that depends on the IMU alone.
TEST(StateMatrix, VelocityDerivativeMinusAdjointOracle) {
  for (int i = 0; i < 200; ++i) {
    const GroupElement g = random_group();
    const ImuSample imu = random_imu();
    Mat9 derivative_term = Mat9::Zero();
    derivative_term.block<3, 3>(6, 0) = se23::skew(g.R.transpose() * g.v);
    derivative_term.block<3, 3>(6, 3) = Mat3::Identity();
    const Mat9 oracle =
        derivative_term - se23::adjoint(group_velocity(g, imu));
    EXPECT_LT((state_matrix(imu) - oracle).norm(), 1e-13);
  }
}

TEST(NoiseInput, ReferenceGainsSquare) {
  Mat9 expected = Mat9::Zero();
  expected.block<3, 3>(0, 0) = 0.01 * Mat3::Identity();
  expected.block<3, 3>(3, 3) = 0.01 * Mat3::Identity();
  const NoiseGains gains = reference_gains();
  EXPECT_LT((noise_input_squared(gains) - expected).norm(), 1e-15);
  const mef::Mat96 b = noise_input_matrix(gains);
  EXPECT_LT((b * b.transpose() - expected).norm(), 1e-15);
}

TEST(NoiseInput, ZeroGains) {
  NoiseGains gains;
  EXPECT_TRUE(noise_input_matrix(gains).isZero(0.0));
  EXPECT_TRUE(noise_input_squared(gains).isZero(0.0));
}

TEST(NoiseInput, SquareIsPsdWithRankAtMostSix) {
  for (int i = 0; i < 50; ++i) {
    NoiseGains gains;
    gains.B_omega = Mat3::Random();
    gains.B_a = Mat3::Random();
    const Mat9 bbt = noise_input_squared(gains);
    const Eigen::SelfAdjointEigenSolver<Mat9> eig(bbt);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
    int positive = 0;
    for (int k = 0; k < 9; ++k) {
      if (eig.eigenvalues()(k) > 1e-12) {
        ++positive;
      }
    }
    EXPECT_LE(positive, 6);
  }
}

TEST(NoiseGains, RejectsSingularMeasurementGain) {
  NoiseGains gains;
  gains.D = Mat3::Zero();
  EXPECT_THROW(gains.measurement_weight(), std::invalid_argument);
}

TEST(Residual, SignConventionIsFrozen) {
  EXPECT_EQ(kResidualSign, -1.0);
}

TEST(Residual, ZeroInnovationGivesZero) {
  const GroupElement g = random_group();
  const LandmarkMap map = default_map();
  EXPECT_TRUE(
      residual(g, ideal_batch(g, map), map, reference_gains()).isZero(1e-14));
}

TEST(Residual, EmptyBatchGivesZero) {
  EXPECT_TRUE(
      residual(random_group(), LandmarkBatch{}, default_map(),
               reference_gains())
          .isZero(0.0));
}

TEST(Residual, SingleLandmarkHandComputed) {
  // Identity estimate, landmark on the x axis, innovation epsilon along z.
  const double eps = 1e-2;
  NoiseGains gains;
  gains.D = Mat3::Identity();
  const LandmarkMap map = {Vec3(1, 0, 0)};
  LandmarkBatch batch;
  batch.observations.push_back({0, Vec3(1, 0, eps)});

  const Vec9 r = residual(GroupElement::identity(), batch, map, gains);
  const Vec3 innovation(0, 0, eps);
  const Vec9 expected =
      kResidualSign * op_F(Vec3(1, 0, 0)).transpose() * innovation;
  EXPECT_LT((r - expected).norm(), 1e-16);
  // Spelled out: the z-innovation pulls position along z and tilts about y.
  Vec9 by_hand = Vec9::Zero();
  by_hand(1) = eps;
  by_hand(8) = -eps;
  EXPECT_LT((r - by_hand).norm(), 1e-16);
}

TEST(Residual, AdditiveOverLandmarks) {
  const GroupElement g = random_group();
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  LandmarkBatch both, first, second;
  first.observations.push_back({0, random_vec3(12.0)});
  second.observations.push_back({2, random_vec3(12.0)});
  both.observations = {first.observations[0], second.observations[0]};
  const Vec9 sum =
      residual(g, first, map, gains) + residual(g, second, map, gains);
  EXPECT_LT((residual(g, both, map, gains) - sum).norm(), 1e-15);
}

TEST(MeasurementCurvature, ZeroInnovationIsQuadraticTerm) {
  const GroupElement g = random_group();
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  const Mat3 weight = gains.measurement_weight();
  Mat9 expected = Mat9::Zero();
  for (std::size_t i = 0; i < map.size(); ++i) {
    const mef::Mat39 f = op_F(predict_measurement(g, map[i]));
    expected += f.transpose() * weight * f;
  }
  const Mat9 e = measurement_curvature(g, ideal_batch(g, map), map, gains);
  EXPECT_LT((e - expected).norm(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<Mat9> eig(e);
  EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-10);
  EXPECT_LT((e - e.transpose()).norm(), 1e-13);
}

TEST(MeasurementCurvature, WeightScalesQuadraticTerm) {
  const GroupElement g = random_group();
  const LandmarkMap map = default_map();
  NoiseGains unit;
  unit.D = Mat3::Identity();
  NoiseGains half = unit;
  half.D = 0.5 * Mat3::Identity();
  const Mat9 e_unit = measurement_curvature(g, ideal_batch(g, map), map, unit);
  const Mat9 e_half = measurement_curvature(g, ideal_batch(g, map), map, half);
  EXPECT_LT((e_half - 4.0 * e_unit).norm(), 1e-10);
}

TEST(MeasurementCurvature, EmptyBatchGivesZero) {
  EXPECT_TRUE(measurement_curvature(random_group(), LandmarkBatch{},
                                    default_map(), reference_gains())
                  .isZero(0.0));
}

TEST(MeasurementCurvature, AdditiveOverLandmarks) {
  const GroupElement g = random_group();
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  LandmarkBatch both, first, second;
  first.observations.push_back({1, random_vec3(12.0)});
  second.observations.push_back({3, random_vec3(12.0)});
  both.observations = {first.observations[0], second.observations[0]};
  const Mat9 sum = measurement_curvature(g, first, map, gains) +
                   measurement_curvature(g, second, map, gains);
  EXPECT_LT((measurement_curvature(g, both, map, gains) - sum).norm(), 1e-13);
}

// Evaluates the curvature as a bilinear form from dense 5x5 products: for
// directions X and Y,
//   Y' E X = sum_i [ -<w_i, top3((XY + YX)/2 * bar(yh_i))>
//                    + <W top3(X bar(yh_i)), top3(Y bar(yh_i))> ]
// with w_i = W (y_i - yh_i). This route never touches op_G.
TEST(MeasurementCurvature, BilinearFormOracle) {
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  const Mat3 weight = gains.measurement_weight();
  for (int trial = 0; trial < 50; ++trial) {
    const GroupElement g = random_group();
    LandmarkBatch batch;
    for (std::size_t i = 0; i < map.size(); ++i) {
      batch.observations.push_back(
          {i, predict_measurement(g, map[i]) + random_vec3(1.0)});
    }
    const Mat9 e = measurement_curvature(g, batch, map, gains);
    const Vec9 x = random_vec9();
    const Vec9 y = random_vec9();
    const Mat5 wx = se23::wedge(x);
    const Mat5 wy = se23::wedge(y);
    double oracle = 0.0;
    for (const auto& obs : batch.observations) {
      const Vec3 y_hat = predict_measurement(g, map[obs.index]);
      const mef::Vec5 h = se23::bar(y_hat);
      const Vec3 w_i = weight * (obs.y - y_hat);
      const Vec3 hess = (0.5 * (wx * wy + wy * wx) * h).head<3>();
      const Vec3 dx = (wx * h).head<3>();
      const Vec3 dy = (wy * h).head<3>();
      oracle += -w_i.dot(hess) + dy.dot(weight * dx);
    }
    const double direct = y.dot(e * x);
    EXPECT_LT(std::abs(direct - oracle), 1e-10 * (1.0 + std::abs(oracle)));
  }
}

TEST(InformationRate, AllPiecesZero) {
  EXPECT_TRUE(information_rate(Mat9::Identity(), Mat9::Zero(), Mat9::Zero(),
                               Mat9::Zero(), Vec9::Zero())
                  .isZero(0.0));
}

TEST(InformationRate, SymmetricForSymmetricInput) {
  for (int i = 0; i < 50; ++i) {
    FilterState state{random_group(), random_spd(), 0.0};
    const Mat9 rate = information_rate(state, random_imu(), LandmarkBatch{},
                                       default_map(), reference_gains());
    EXPECT_LT((rate - rate.transpose()).norm(), 1e-12);
  }
}

TEST(InformationRate, SingularPIsRejected) {
  EXPECT_THROW(information_rate(Mat9::Zero(), Mat9::Zero(), Mat9::Zero(),
                                Mat9::Zero(), Vec9::Ones()),
               std::invalid_argument);
}

// The gain flow and the information flow are mutually inverse:
// d(K P)/dt = K_dot P + K P_dot = 0.
TEST(InformationRate, ConsistentWithGainRate) {
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  for (int i = 0; i < 50; ++i) {
    const GroupElement g = random_group();
    const FilterState state{g, random_spd(), 0.0};
    LandmarkBatch batch;
    for (std::size_t k = 0; k < map.size(); ++k) {
      batch.observations.push_back(
          {k, predict_measurement(g, map[k]) + random_vec3(0.5)});
    }
    const ImuSample imu = random_imu();
    const Mat9 p_dot = information_rate(state, imu, batch, map, gains);
    const Mat9 k_dot = gain_rate(state, imu, batch, map, gains);
    const Mat9 K = state.P.inverse();
    const double scale = (k_dot * state.P).norm() + (K * p_dot).norm();
    EXPECT_LT((k_dot * state.P + K * p_dot).norm(), 1e-10 * (1.0 + scale));
  }
}

TEST(Predict, RestingStateKeepsEstimate) {
  const FilterState state{GroupElement::identity(), random_spd(), 1.5};
  const FilterState next = predict(state, ImuSample{}, 1e-3, reference_gains());
  EXPECT_LT((next.g_hat.matrix() - Mat5::Identity()).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(next.t, 1.5 + 1e-3);
  // P still moves through the constant coupling block of the state matrix.
  const Mat9 a = state_matrix(ImuSample{});
  const Mat9 expected = se23::proj_sym(
      state.P - 2e-3 * se23::proj_sym(state.P * a) -
      1e-3 * state.P * noise_input_squared(reference_gains()) * state.P);
  EXPECT_LT((next.P - expected).norm(), 1e-14);
}

TEST(Predict, ZeroDtIsIdentity) {
  const FilterState state{random_group(), random_spd(), 2.0};
  const FilterState next = predict(state, random_imu(), 0.0, reference_gains());
  EXPECT_LT((next.g_hat.matrix() - state.g_hat.matrix()).norm(), 1e-15);
  EXPECT_LT((next.P - state.P).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(next.t, state.t);
}

// Fourth-order integration of the IMU-only information flow over one step;
// the Euler predict must agree to O(dt^2). States are kept at scenario
// scale; the constant in the bound grows with |P| and |u|.
TEST(Predict, MatchesHighOrderIntegrationToFirstOrder) {
  const double dt = 1e-3;
  const NoiseGains gains = reference_gains();
  for (int i = 0; i < 20; ++i) {
    Vec9 diag;
    diag << 1, 1, 1, 2, 2, 2, 3, 3, 3;
    FilterState state{random_group(0.3), Mat9(diag.asDiagonal()), 0.0};
    state.P += 0.2 * random_spd(0.3);
    ImuSample imu;
    imu.u_omega = random_vec3(0.4);
    imu.u_a = random_vec3(0.4);
    const Mat9 a = state_matrix(imu);
    const Mat9 bbt = noise_input_squared(gains);
    const auto rhs = [&](const Mat9& p) -> Mat9 {
      return -2.0 * se23::proj_sym(p * a) - p * bbt * p;
    };
    const Mat9 k1 = rhs(state.P);
    const Mat9 k2 = rhs(state.P + 0.5 * dt * k1);
    const Mat9 k3 = rhs(state.P + 0.5 * dt * k2);
    const Mat9 k4 = rhs(state.P + dt * k3);
    const Mat9 reference =
        state.P + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const FilterState next = predict(state, imu, dt, gains);
    EXPECT_LT((next.P - reference).cwiseAbs().maxCoeff(), 10.0 * dt * dt);
  }
}

TEST(Update, ZeroInnovationKeepsEstimateAndAddsInformation) {
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  const GroupElement g = random_group();
  const FilterState state{g, random_spd(), 0.0};
  const LandmarkBatch batch = ideal_batch(g, map);
  const FilterState next = update(state, batch, map, gains);
  EXPECT_LT((next.g_hat.matrix() - g.matrix()).norm(), 1e-12);
  const Mat9 expected =
      state.P + gains.alpha * measurement_curvature(g, batch, map, gains);
  EXPECT_LT((next.P - expected).norm(), 1e-11);
}

TEST(Update, EmptyBatchIsIdentity) {
  const FilterState state{random_group(), random_spd(), 3.0};
  const FilterState next =
      update(state, LandmarkBatch{}, default_map(), reference_gains());
  EXPECT_EQ(next.g_hat.R, state.g_hat.R);
  EXPECT_EQ(next.g_hat.v, state.g_hat.v);
  EXPECT_EQ(next.g_hat.x, state.g_hat.x);
  EXPECT_EQ(next.P, state.P);
  EXPECT_EQ(next.t, state.t);
}

// With alpha = dt and both stages evaluated from the same base state, the
// predict and update information deltas add up to one exact Euler step of
// the full flow.
TEST(Update, SplitStepsSumToEulerStepOfFullFlow) {
  const LandmarkMap map = default_map();
  const double dt = 1e-3;
  NoiseGains gains = reference_gains();
  gains.alpha = dt;
  for (int i = 0; i < 50; ++i) {
    const GroupElement g = random_group();
    const FilterState state{g, random_spd(), 0.0};
    LandmarkBatch batch;
    for (std::size_t k = 0; k < map.size(); ++k) {
      batch.observations.push_back(
          {k, predict_measurement(g, map[k]) + random_vec3(0.5)});
    }
    const ImuSample imu = random_imu();
    const Mat9 dp_predict = predict(state, imu, dt, gains).P - state.P;
    const Mat9 dp_update = update(state, batch, map, gains).P - state.P;
    const Mat9 euler = dt * information_rate(state, imu, batch, map, gains);
    const double rel = (dp_predict + dp_update - euler).norm() / euler.norm();
    EXPECT_LT(rel, 1e-12);
  }
}

// Sequential composition (predict, then update at the propagated state)
// tracks the Euler integration of the full flow to O(dt^2) per entry. A
// halved step must shrink the defect by about four, confirming the order.
TEST(Update, SequentialCompositionMatchesEulerToSecondOrder) {
  const LandmarkMap map = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                           Vec3(0.7, 0.7, 0.7)};
  NoiseGains base_gains;
  base_gains.B_omega = 0.1 * Mat3::Identity();
  base_gains.B_a = 0.1 * Mat3::Identity();
  base_gains.D = Mat3::Identity();
  for (int i = 0; i < 20; ++i) {
    Vec9 diag;
    diag << 0.5, 0.5, 0.5, 1, 1, 1, 2, 2, 2;
    FilterState state{se23::exp(random_vec9(0.15)), Mat9(diag.asDiagonal()),
                      0.0};
    state.P += 0.1 * random_spd(0.3);
    LandmarkBatch batch;
    for (std::size_t k = 0; k < map.size(); ++k) {
      batch.observations.push_back(
          {k, predict_measurement(state.g_hat, map[k]) + random_vec3(0.03)});
    }
    ImuSample imu;
    imu.u_omega = random_vec3(0.15);
    imu.u_a = random_vec3(0.15);

    const auto defect = [&](double dt) -> double {
      NoiseGains gains = base_gains;
      gains.alpha = dt;
      const Mat9 euler =
          state.P + dt * information_rate(state, imu, batch, map, gains);
      FilterState stepped = predict(state, imu, dt, gains);
      stepped = update(stepped, batch, map, gains);
      return (stepped.P - euler).cwiseAbs().maxCoeff();
    };

    const double dt = 1e-3;
    EXPECT_LT(defect(dt), 10.0 * dt * dt);
    if (defect(dt) > 1e-12) {
      const double ratio = defect(dt) / defect(dt / 2.0);
      EXPECT_GT(ratio, 2.5);
      EXPECT_LT(ratio, 6.0);
    }
  }
}

TEST(Update, LostPositiveDefinitenessThrows) {
  // A huge innovation makes the curvature indefinite; with a weak prior and
  // a large update weight the information matrix must go non-SPD.
  NoiseGains gains;
  gains.D = Mat3::Identity();
  gains.alpha = 10.0;
  const LandmarkMap map = {Vec3(1, 0, 0)};
  LandmarkBatch batch;
  batch.observations.push_back({0, Vec3(1, 0, 500.0)});
  const FilterState state{GroupElement::identity(), 1e-3 * Mat9::Identity(),
                          7.25};
  try {
    update(state, batch, map, gains);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& err) {
    EXPECT_DOUBLE_EQ(err.time(), 7.25);
  }
}

TEST(Init, AcceptsReferenceInformationDiagonal) {
  Vec9 diag;
  diag << 1e-3, 1e-3, 1e-3, 3, 3, 3, 5, 5, 5;
  const FilterState state =
      init(GroupElement::identity(), diag.asDiagonal(), 0.0);
  EXPECT_EQ(state.t, 0.0);
  EXPECT_EQ(state.P, Mat9(diag.asDiagonal()));
}

TEST(Init, AcceptsIdentity) {
  EXPECT_NO_THROW(init(random_group(), Mat9::Identity(), 1.0));
}

TEST(Init, RejectsIndefiniteMatrix) {
  Vec9 diag = Vec9::Ones();
  diag(4) = -1.0;
  EXPECT_THROW(init(GroupElement::identity(), diag.asDiagonal(), 0.0),
               std::invalid_argument);
}

TEST(Init, RejectsAsymmetricMatrix) {
  Mat9 p = Mat9::Identity();
  p(0, 1) = 0.1;
  EXPECT_THROW(init(GroupElement::identity(), p, 0.0), std::invalid_argument);
}

TEST(FilterState, PStaysSymmetricUnderInterleaving) {
  const LandmarkMap map = default_map();
  const NoiseGains gains = reference_gains();
  Vec9 diag;
  diag << 1e-3, 1e-3, 1e-3, 3, 3, 3, 5, 5, 5;
  FilterState state = init(random_group(0.3), diag.asDiagonal(), 0.0);
  std::uniform_int_distribution<int> coin(0, 3);
  for (int i = 0; i < 2000; ++i) {
    if (coin(g_rng) == 0) {
      LandmarkBatch batch = ideal_batch(state.g_hat, map, state.t);
      for (auto& obs : batch.observations) {
        obs.y += random_vec3(0.3);
      }
      state = update(state, batch, map, gains);
    } else {
      state = predict(state, random_imu(), 1e-3, gains);
    }
    EXPECT_LT((state.P - state.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

// Analytic measurement derivative against Richardson-extrapolated central
// differences along random algebra directions.
TEST(PredictMeasurement, DerivativeMatchesFiniteDifferences) {
  for (int i = 0; i < 20; ++i) {
    const GroupElement g = random_group();
    const Vec9 x = random_vec9();
    const Vec3 l = random_vec3(10.0);
    const Vec3 y_hat = predict_measurement(g, l);
    const Vec3 analytic = -op_F(y_hat) * x;
    const auto diff = [&](double s) -> Vec3 {
      const GroupElement plus = se23::compose(g, se23::exp(s * x));
      const GroupElement minus = se23::compose(g, se23::exp(-s * x));
      return (predict_measurement(plus, l) - predict_measurement(minus, l)) /
             (2.0 * s);
    };
    const double s = 1e-3;
    const Vec3 richardson = (4.0 * diff(s / 2.0) - diff(s)) / 3.0;
    EXPECT_LT((richardson - analytic).norm(), 1e-6);
  }
}

}  // namespace
