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

#ifndef MEF_SE23_HPP
#define MEF_SE23_HPP

#include <Eigen/Core>

namespace mef {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat59 = Eigen::Matrix<double, 5, 9>;
using Mat96 = Eigen::Matrix<double, 9, 6>;

namespace se23 {

/// Coordinates of an algebra element, stacked as (xi_R, xi_v, xi_x).
using AlgebraVector = Vec9;

inline AlgebraVector make_algebra(const Vec3& xi_R, const Vec3& xi_v,
                                  const Vec3& xi_x) {
  AlgebraVector xi;
  xi << xi_R, xi_v, xi_x;
  return xi;
}

inline Vec3 rotation_part(const AlgebraVector& xi) { return xi.segment<3>(0); }
inline Vec3 velocity_part(const AlgebraVector& xi) { return xi.segment<3>(3); }
inline Vec3 position_part(const AlgebraVector& xi) { return xi.segment<3>(6); }

/// A group element: rotation, inertial velocity, inertial position.
/// Embeds as the 5x5 matrix [R v x; 0 1 0; 0 0 1].
struct GroupElement {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 x = Vec3::Zero();

  static GroupElement identity() { return {}; }

  Mat5 matrix() const;
  static GroupElement from_matrix(const Mat5& m);

  /// Frobenius norm of R'R - I; zero for an exact rotation.
  double orthonormality_error() const;
};

/// skew(w) * u == w x u for all u.
Mat3 skew(const Vec3& w);

/// Inverse of skew. Rejects matrices that are not antisymmetric to 1e-9.
Vec3 vex(const Mat3& m);

/// 9-vector -> 5x5 algebra matrix: skew(xi_R) top-left, xi_v and xi_x in
/// columns 4 and 5, bottom two rows zero.
Mat5 wedge(const AlgebraVector& xi);

/// Inverse of wedge. Rejects matrices outside the algebra (top-left block
/// antisymmetric to 1e-9, bottom two rows zero to 1e-12).
AlgebraVector vee(const Mat5& m);

/// Group product. Re-orthonormalizes the rotation block if accumulated
/// drift exceeds 1e-9.
GroupElement compose(const GroupElement& a, const GroupElement& b);

inline GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  return compose(a, b);
}

/// (R', -R'v, -R'x), the group inverse.
GroupElement inverse(const GroupElement& g);

/// Exponential map, in closed form: Rodrigues for the rotation block, the
/// SO(3) left Jacobian for the velocity and position columns. Falls back to
/// 4th-order Taylor coefficients below the small-angle threshold.
GroupElement exp(const AlgebraVector& xi);

/// Logarithm map. Defined for rotation angles strictly below pi; rejects
/// trace(R) <= -1 + 1e-9 (axis is ambiguous there).
AlgebraVector log(const GroupElement& g);

/// 9x9 matrix of ad_xi in the standard basis:
/// [[xi_Rx, 0, 0], [xi_vx, xi_Rx, 0], [xi_xx, 0, xi_Rx]].
Mat9 adjoint(const AlgebraVector& xi);

/// Homogeneous embedding (v, 0, 1) of a 3-vector.
Vec5 bar(const Vec3& v);

/// F(v) = [-skew(v) | 0 | I3], so that the top three rows of wedge(xi)*bar(v)
/// equal F(v)*xi.
Mat39 op_F(const Vec3& v);

/// F(v) stacked on two zero rows; wedge(xi)*bar(v) == op_Fbar(v)*xi.
Mat59 op_Fbar(const Vec3& v);

/// G(v) = [skew(v) | 0 | 0]; top three rows of wedge(xi)' * bar(v).
Mat39 op_G(const Vec3& v);

/// Block diagonal (skew(v), v', v'); wedge(xi)' * bar(v) == op_Gbar(v)*xi.
Mat59 op_Gbar(const Vec3& v);

/// SO(3) exponential (Rodrigues).
Mat3 exp_so3(const Vec3& w);

/// SO(3) logarithm; same angle-pi restriction as log().
Vec3 log_so3(const Mat3& R);

/// Nearest rotation matrix (polar projection).
Mat3 orthonormalized(const Mat3& R);

/// (A + A')/2.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
              Derived::ColsAtCompileTime>
proj_sym(const Eigen::MatrixBase<Derived>& a) {
  return 0.5 * (a + a.transpose());
}

}  // namespace se23
}  // namespace mef

#endif  // MEF_SE23_HPP
