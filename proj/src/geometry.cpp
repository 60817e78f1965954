#include "groundcal/geometry.hpp"

#include <cmath>
#include <sstream>

namespace groundcal {

namespace {

void check_rotation_or_throw(const Mat3& rot, const char* where) {
  if (!is_rotation(rot)) {
    std::ostringstream oss;
    oss << where << ": input is not orthonormal (||R^T R - I|| = "
        << (rot.transpose() * rot - Mat3::Identity()).norm()
        << ", det = " << rot.determinant() << ")";
    throw NonOrthonormalRotation(oss.str());
  }
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 exp_so3(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-8) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * k + c * k * k;
}

Vec3 log_so3(const Mat3& rot) {
  check_rotation_or_throw(rot, "log_so3");
  // Quaternion route: numerically stable across the whole branch,
  // including angles near pi where the trace formula degrades.
  Eigen::Quaterniond q(rot);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // principal branch
  const Vec3 vec(q.x(), q.y(), q.z());
  const double sin_half = vec.norm();
  if (sin_half < 1e-9) {
    return 2.0 * vec;  // theta ~ 0: sin(theta/2) ~ theta/2
  }
  const double theta = 2.0 * std::atan2(sin_half, q.w());
  return (theta / sin_half) * vec;
}

Mat3 right_jacobian_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 k = skew(phi);
  double c1, c2;  // Jr = I - c1 [phi]x + c2 [phi]x^2
  if (theta2 < 1e-8) {
    c1 = 0.5 - theta2 / 24.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    c1 = (1.0 - std::cos(theta)) / theta2;
    c2 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() - c1 * k + c2 * k * k;
}

Mat3 right_jacobian_inv_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 k = skew(phi);
  double c2;  // Jr^-1 = I + 0.5 [phi]x + c2 [phi]x^2
  if (theta2 < 1e-8) {
    c2 = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    c2 = 1.0 / theta2 -
         (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() + 0.5 * k + c2 * k * k;
}

bool is_rotation(const Mat3& rot, double tol) {
  const double residual = (rot.transpose() * rot - Mat3::Identity()).norm();
  return residual <= tol && rot.determinant() > 0.0;
}

Mat3 euler_zyx_to_rot(const Vec3& rpy) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), sp = std::sin(rpy.y());
  const double cy = std::cos(rpy.z()), sy = std::sin(rpy.z());
  Mat3 rot;
  rot << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp, cp * sr, cp * cr;
  return rot;
}

Vec3 rot_to_euler_zyx(const Mat3& rot) {
  check_rotation_or_throw(rot, "rot_to_euler_zyx");
  const double sp = -rot(2, 0);
  const double pitch = std::asin(std::clamp(sp, -1.0, 1.0));
  const double roll = std::atan2(rot(2, 1), rot(2, 2));
  const double yaw = std::atan2(rot(1, 0), rot(0, 0));
  return Vec3(roll, pitch, yaw);
}

Rotation Rotation::from_matrix(const Mat3& m) {
  check_rotation_or_throw(m, "Rotation::from_matrix");
  Rotation r;
  r.mat_ = m;
  return r;
}

Rotation Rotation::from_euler_zyx_deg(const Vec3& rpy_deg) {
  return from_euler_zyx(Vec3(deg_to_rad(rpy_deg.x()), deg_to_rad(rpy_deg.y()),
                             deg_to_rad(rpy_deg.z())));
}

Rotation Rotation::from_two_vectors(const Vec3& from, const Vec3& to) {
  const Eigen::Quaterniond q =
      Eigen::Quaterniond::FromTwoVectors(from, to);
  return from_matrix(q.toRotationMatrix());
}

Vec3 Rotation::euler_zyx_deg() const {
  const Vec3 rpy = euler_zyx();
  return Vec3(rad_to_deg(rpy.x()), rad_to_deg(rpy.y()), rad_to_deg(rpy.z()));
}

double rotation_angle_between(const Rotation& a, const Rotation& b) {
  return log_so3(a.matrix() * b.matrix().transpose()).norm();
}

ManifoldState boxplus(const ManifoldState& x, const Vec12& delta) {
  ManifoldState out;
  out.rot = x.rot * Rotation::exp(delta.segment<3>(0));
  out.pos = x.pos + delta.segment<3>(3);
  out.omega = x.omega + delta.segment<3>(6);
  out.vel = x.vel + delta.segment<3>(9);
  return out;
}

Vec12 boxminus(const ManifoldState& a, const ManifoldState& b) {
  Vec12 d;
  d.segment<3>(0) = log_so3(b.rot.matrix().transpose() * a.rot.matrix());
  d.segment<3>(3) = a.pos - b.pos;
  d.segment<3>(6) = a.omega - b.omega;
  d.segment<3>(9) = a.vel - b.vel;
  return d;
}

}  // namespace groundcal
