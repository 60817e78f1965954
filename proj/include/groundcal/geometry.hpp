#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "groundcal/errors.hpp"

// SO(3) primitives and the 12-D manifold state used by the LiDAR odometry.
//
// Conventions (used consistently across the library):
//  * Rotations are named by the map they perform on coordinates:
//    rot_a_to_b maps a-frame coordinates to b-frame coordinates.
//  * exp/log use the principal branch, ||phi|| <= pi.
//  * Euler angles are intrinsic Z-Y-X (yaw, pitch, roll), stored as
//    (roll, pitch, yaw) in radians: R = Rz(yaw) * Ry(pitch) * Rx(roll).
//  * Manifold state tangent block order: [d_theta, d_pos, d_omega, d_vel].

namespace groundcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

inline constexpr double kOrthonormalityTol = 1e-6;

// [v]_x such that skew(v) * u = v x u.
Mat3 skew(const Vec3& v);

// Rodrigues formula; second-order Taylor expansion below 1e-8 rad.
Mat3 exp_so3(const Vec3& phi);

// Principal-branch logarithm. Throws NonOrthonormalRotation if the input
// fails the orthonormality check (residual > 1e-6 or negative determinant).
Vec3 log_so3(const Mat3& rot);

// Right Jacobian of SO(3): Exp(phi + d) ~= Exp(phi) * Exp(Jr(phi) d).
Mat3 right_jacobian_so3(const Vec3& phi);
Mat3 right_jacobian_inv_so3(const Vec3& phi);

// True if rot^T rot = I within tol and det(rot) > 0.
bool is_rotation(const Mat3& rot, double tol = kOrthonormalityTol);

// (roll, pitch, yaw) [rad] -> R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 euler_zyx_to_rot(const Vec3& rpy);
// Inverse of the above; pitch in [-pi/2, pi/2]. Validates input.
Vec3 rot_to_euler_zyx(const Mat3& rot);

// Validated rotation value type. Every construction path re-checks
// orthonormality so downstream code can rely on the invariant.
class Rotation {
 public:
  Rotation() : mat_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  // Throws NonOrthonormalRotation when m is not a rotation matrix.
  static Rotation from_matrix(const Mat3& m);

  static Rotation exp(const Vec3& phi) { return from_matrix(exp_so3(phi)); }

  static Rotation from_euler_zyx(const Vec3& rpy_rad) {
    return from_matrix(euler_zyx_to_rot(rpy_rad));
  }

  static Rotation from_euler_zyx_deg(const Vec3& rpy_deg);

  // Geodesic (zero-twist) rotation sending direction `from` to `to`.
  static Rotation from_two_vectors(const Vec3& from, const Vec3& to);

  const Mat3& matrix() const { return mat_; }
  Rotation transposed() const { return from_matrix(mat_.transpose()); }
  Vec3 log() const { return log_so3(mat_); }
  Vec3 euler_zyx() const { return rot_to_euler_zyx(mat_); }
  Vec3 euler_zyx_deg() const;

  Vec3 operator*(const Vec3& v) const { return mat_ * v; }
  Rotation operator*(const Rotation& o) const {
    return from_matrix(mat_ * o.mat_);
  }

 private:
  Mat3 mat_;
};

// Geodesic angle between two rotations, in radians.
double rotation_angle_between(const Rotation& a, const Rotation& b);

// 12-D manifold state: attitude (body -> odom), position of the body origin
// in the odom frame, and body-frame angular/linear velocity.
struct ManifoldState {
  Rotation rot;
  Vec3 pos = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
};

// x [+] delta: attitude block composes on the right, vector blocks add.
ManifoldState boxplus(const ManifoldState& x, const Vec12& delta);

// a [-] b: inverse of boxplus in the first argument,
// rotation block = log(b.rot^T a.rot).
Vec12 boxminus(const ManifoldState& a, const ManifoldState& b);

inline double deg_to_rad(double d) { return d * M_PI / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / M_PI; }

}  // namespace groundcal
