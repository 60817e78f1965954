#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "groundcal/ground.hpp"

using namespace groundcal;

namespace {

// Points on the plane n.x + d = 0 spanned around the foot of the sensor.
std::vector<Vec3> plane_points(const Vec3& n_unit, double d, int count,
                               double extent, std::mt19937_64& rng) {
  Vec3 u = n_unit.cross(Vec3::UnitX());
  if (u.norm() < 1e-6) u = n_unit.cross(Vec3::UnitY());
  u.normalize();
  const Vec3 w = n_unit.cross(u).normalized();
  std::uniform_real_distribution<double> s(-extent, extent);
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    pts.push_back(-d * n_unit + s(rng) * u + s(rng) * w);
  }
  return pts;
}

class GroundTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{7};
};

TEST_F(GroundTest, FitTiltedPlaneExact) {
  const Vec3 n_true = exp_so3(Vec3(0.1, 0, 0)) * Vec3::UnitZ();
  const double d_true = 0.8;
  const auto pts = plane_points(n_true, d_true, 400, 3.0, rng);
  const GroundPlane plane = fit_plane_pca(pts);
  EXPECT_LT((plane.normal - n_true).norm(), 1e-6);
  EXPECT_NEAR(plane.d, d_true, 1e-6);
  EXPECT_LT(plane.rms, 1e-7);
}

TEST_F(GroundTest, FitOrientsSensorAbove) {
  // Level ground 1.2 m below the sensor: normal must point up, d = 1.2.
  const auto pts = plane_points(Vec3::UnitZ(), 1.2, 100, 4.0, rng);
  const GroundPlane plane = fit_plane_pca(pts);
  EXPECT_GT(plane.normal.z(), 0.999999);
  EXPECT_NEAR(plane.d, 1.2, 1e-9);
}

TEST_F(GroundTest, FitRejectsCollinear) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(Vec3(0.1 * i, 0.2 * i, -1.0));
  EXPECT_THROW(fit_plane_pca(pts), DegenerateGeometry);
  std::vector<Vec3> two = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  EXPECT_THROW(fit_plane_pca(two), DegenerateGeometry);
}

TEST_F(GroundTest, PcaEquivarianceUnderRotation) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, M_PI - 0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec3 n(g(rng), g(rng), g(rng));
    while (n.norm() < 1e-3) n = Vec3(g(rng), g(rng), g(rng));
    n.normalize();
    if (n.z() < 0) n = -n;
    const auto pts = plane_points(n, 1.0, 40, 2.0, rng);

    Vec3 axis(g(rng), g(rng), g(rng));
    while (axis.norm() < 1e-3) axis = Vec3(g(rng), g(rng), g(rng));
    const Mat3 rot = exp_so3(axis.normalized() * mag(rng));

    std::vector<Vec3> rotated;
    rotated.reserve(pts.size());
    for (const auto& p : pts) rotated.push_back(rot * p);

    const Vec3 n0 = fit_plane_pca(pts).normal;
    const Vec3 n1 = fit_plane_pca(rotated).normal;
    // Orientation convention may flip the sign; the subspace must rotate.
    EXPECT_NEAR(std::abs(n1.dot(rot * n0)), 1.0, 1e-9);
  }
}

TEST_F(GroundTest, RotationFromNormalsTiltAboutX) {
  const Vec3 n = exp_so3(Vec3(0.1, 0, 0)) * Vec3::UnitZ();
  const Rotation rot = rotation_from_normals(n);
  EXPECT_NEAR(rot.log().norm(), 0.1, 1e-9);
  EXPECT_LT((rot * Vec3::UnitZ() - n).norm(), 1e-12);
}

TEST_F(GroundTest, RotationFromNormalsParallelIsIdentity) {
  const Rotation rot = rotation_from_normals(Vec3(0, 0, 1));
  EXPECT_LT(rot.log().norm(), 1e-12);
}

TEST_F(GroundTest, RotationFromNormalsAntiparallelThrows) {
  EXPECT_THROW(rotation_from_normals(Vec3(0, 0, -1)), AntiparallelNormal);
  EXPECT_THROW(rotation_from_normals(Vec3(0.01, 0, -0.9999)),
               AntiparallelNormal);
}

TEST_F(GroundTest, SegmentationRecoversExactGroundSet) {
  // 500 ground points at z = -0.8 plus 200 wall points at x = 5,
  // wall starting 0.2 m above the ground (outside the inlier threshold).
  std::vector<Vec3> pts = plane_points(Vec3::UnitZ(), 0.8, 500, 4.0, rng);
  std::uniform_real_distribution<double> wy(-3.0, 3.0);
  std::uniform_real_distribution<double> wz(-0.6, 1.5);
  for (int i = 0; i < 200; ++i) pts.push_back(Vec3(5.0, wy(rng), wz(rng)));

  const auto inliers = segment_ground(pts, GroundConfig{});
  ASSERT_EQ(inliers.size(), 500u);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(inliers[i], i);

  const GroundObservation obs = observe_ground(pts, GroundConfig{});
  EXPECT_NEAR(obs.d, 0.8, 1e-9);
  EXPECT_GT(obs.normal.z(), 0.999999);
  EXPECT_LT(rotation_angle_between(obs.rot_ground_to_lidar,
                                   Rotation::identity()),
            1e-9);
}

TEST_F(GroundTest, WallOnlyScanThrows) {
  // A single vertical plane: its low strip fits a plane, but it is not
  // ground-like (normal nearly horizontal).
  std::vector<Vec3> pts;
  std::uniform_real_distribution<double> wy(-4.0, 4.0);
  std::uniform_real_distribution<double> wz(-0.5, 2.0);
  for (int i = 0; i < 300; ++i) pts.push_back(Vec3(5.0, wy(rng), wz(rng)));
  EXPECT_THROW(segment_ground(pts, GroundConfig{}), InsufficientGround);
}

TEST_F(GroundTest, TooFewPointsThrows) {
  const auto pts = plane_points(Vec3::UnitZ(), 0.8, 20, 2.0, rng);
  EXPECT_THROW(segment_ground(pts, GroundConfig{}), InsufficientGround);
}

TEST_F(GroundTest, NoisyGroundStillWithinTolerance) {
  std::normal_distribution<double> noise(0.0, 0.01);
  auto pts = plane_points(Vec3::UnitZ(), 0.8, 600, 4.0, rng);
  for (auto& p : pts) p.z() += noise(rng);
  const GroundObservation obs = observe_ground(pts, GroundConfig{});
  EXPECT_NEAR(obs.d, 0.8, 5e-3);
  EXPECT_GT(obs.normal.z(), 0.99999);
  EXPECT_GT(static_cast<int>(obs.inlier_indices.size()), 550);
}

}  // namespace
