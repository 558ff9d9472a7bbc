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

#include "mef/se23.hpp"

#include <Eigen/LU>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace mef::se23 {
namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kOrthoTol = 1e-9;

// Rodrigues coefficients sin(t)/t, (1-cos(t))/t^2, (t-sin(t))/t^3 with
// 4th-order Taylor fallbacks near zero.
void rodrigues_coeffs(double theta, double& a, double& b, double& c) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    const double t4 = t2 * t2;
    a = 1.0 - t2 / 6.0 + t4 / 120.0;
    b = 0.5 - t2 / 24.0 + t4 / 720.0;
    c = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
  } else {
    const double s = std::sin(theta);
    const double half = std::sin(0.5 * theta);
    const double t2 = theta * theta;
    a = s / theta;
    b = 2.0 * half * half / t2;  // (1 - cos)/t^2 without cancellation
    c = (theta - s) / (t2 * theta);
  }
}

Mat3 left_jacobian(const Vec3& w) {
  double a, b, c;
  rodrigues_coeffs(w.norm(), a, b, c);
  const Mat3 W = skew(w);
  return Mat3::Identity() + b * W + c * W * W;
}

Mat3 left_jacobian_inverse(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  double c;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    c = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * W + c * W * W;
}

}  // namespace

Mat5 GroupElement::matrix() const {
  Mat5 m = Mat5::Zero();
  m.block<3, 3>(0, 0) = R;
  m.block<3, 1>(0, 3) = v;
  m.block<3, 1>(0, 4) = x;
  m(3, 3) = 1.0;
  m(4, 4) = 1.0;
  return m;
}

GroupElement GroupElement::from_matrix(const Mat5& m) {
  GroupElement g;
  g.R = m.block<3, 3>(0, 0);
  g.v = m.block<3, 1>(0, 3);
  g.x = m.block<3, 1>(0, 4);
  return g;
}

double GroupElement::orthonormality_error() const {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  // clang-format off
  m <<    0.0, -w.z(),  w.y(),
        w.z(),    0.0, -w.x(),
       -w.y(),  w.x(),    0.0;
  // clang-format on
  return m;
}

Vec3 vex(const Mat3& m) {
  if ((m + m.transpose()).norm() > 1e-9) {
    throw std::invalid_argument("vex: matrix is not antisymmetric");
  }
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Mat5 wedge(const AlgebraVector& xi) {
  Mat5 m = Mat5::Zero();
  m.block<3, 3>(0, 0) = skew(rotation_part(xi));
  m.block<3, 1>(0, 3) = velocity_part(xi);
  m.block<3, 1>(0, 4) = position_part(xi);
  return m;
}

AlgebraVector vee(const Mat5& m) {
  if (m.bottomRows<2>().cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("vee: bottom two rows are not zero");
  }
  const Mat3 top = m.block<3, 3>(0, 0);
  if ((top + top.transpose()).norm() > 1e-9) {
    throw std::invalid_argument("vee: rotation block is not antisymmetric");
  }
  return make_algebra({top(2, 1), top(0, 2), top(1, 0)}, m.block<3, 1>(0, 3),
                      m.block<3, 1>(0, 4));
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  GroupElement g;
  g.R = a.R * b.R;
  g.v = a.R * b.v + a.v;
  g.x = a.R * b.x + a.x;
  if (g.orthonormality_error() > kOrthoTol) {
    g.R = orthonormalized(g.R);
  }
  return g;
}

GroupElement inverse(const GroupElement& g) {
  GroupElement inv;
  inv.R = g.R.transpose();
  inv.v = -(inv.R * g.v);
  inv.x = -(inv.R * g.x);
  return inv;
}

GroupElement exp(const AlgebraVector& xi) {
  const Vec3 w = rotation_part(xi);
  GroupElement g;
  g.R = exp_so3(w);
  const Mat3 J = left_jacobian(w);
  g.v = J * velocity_part(xi);
  g.x = J * position_part(xi);
  if (g.orthonormality_error() > kOrthoTol) {
    g.R = orthonormalized(g.R);
  }
  return g;
}

AlgebraVector log(const GroupElement& g) {
  const Vec3 w = log_so3(g.R);
  const Mat3 Jinv = left_jacobian_inverse(w);
  return make_algebra(w, Jinv * g.v, Jinv * g.x);
}

Mat9 adjoint(const AlgebraVector& xi) {
  const Mat3 wr = skew(rotation_part(xi));
  Mat9 ad = Mat9::Zero();
  ad.block<3, 3>(0, 0) = wr;
  ad.block<3, 3>(3, 0) = skew(velocity_part(xi));
  ad.block<3, 3>(3, 3) = wr;
  ad.block<3, 3>(6, 0) = skew(position_part(xi));
  ad.block<3, 3>(6, 6) = wr;
  return ad;
}

Vec5 bar(const Vec3& v) {
  Vec5 h;
  h << v, 0.0, 1.0;
  return h;
}

Mat39 op_F(const Vec3& v) {
  Mat39 f = Mat39::Zero();
  f.block<3, 3>(0, 0) = -skew(v);
  f.block<3, 3>(0, 6) = Mat3::Identity();
  return f;
}

Mat59 op_Fbar(const Vec3& v) {
  Mat59 f = Mat59::Zero();
  f.topRows<3>() = op_F(v);
  return f;
}

Mat39 op_G(const Vec3& v) {
  Mat39 g = Mat39::Zero();
  g.block<3, 3>(0, 0) = skew(v);
  return g;
}

Mat59 op_Gbar(const Vec3& v) {
  Mat59 g = Mat59::Zero();
  g.block<3, 3>(0, 0) = skew(v);
  g.block<1, 3>(3, 3) = v.transpose();
  g.block<1, 3>(4, 6) = v.transpose();
  return g;
}

Mat3 exp_so3(const Vec3& w) {
  double a, b, c;
  rodrigues_coeffs(w.norm(), a, b, c);
  const Mat3 W = skew(w);
  return Mat3::Identity() + a * W + b * W * W;
}

Vec3 log_so3(const Mat3& R) {
  if (R.trace() <= -1.0 + 1e-9) {
    throw std::domain_error("log: rotation angle too close to pi");
  }
  // Quaternion route; the axis stays well conditioned up to the angle-pi
  // domain edge, unlike the antisymmetric-part formula.
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const Vec3 vec = q.vec();
  const double n = vec.norm();
  if (n < 1e-9) {
    return 2.0 * vec;
  }
  return (2.0 * std::atan2(n, q.w()) / n) * vec;
}

Mat3 orthonormalized(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 fixed = svd.matrixU() * svd.matrixV().transpose();
  if (fixed.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    fixed = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return fixed;
}

}  // namespace mef::se23
