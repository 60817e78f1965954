#include "groundcal/ground.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace groundcal {

namespace {

GroundPlane fit_plane_indexed(const std::vector<Vec3>& points,
                              const std::vector<int>& indices) {
  if (indices.size() < 3) {
    std::ostringstream oss;
    oss << "fit_plane_pca: need at least 3 points, got " << indices.size();
    throw DegenerateGeometry(oss.str());
  }
  Vec3 centroid = Vec3::Zero();
  for (int i : indices) centroid += points[i];
  centroid /= static_cast<double>(indices.size());

  Mat3 cov = Mat3::Zero();
  for (int i : indices) {
    const Vec3 q = points[i] - centroid;
    cov += q * q.transpose();
  }
  cov /= static_cast<double>(indices.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues();  // ascending
  if (evals(1) - evals(0) <= 1e-9 * std::max(evals(2), 1e-300)) {
    throw DegenerateGeometry(
        "fit_plane_pca: two smallest eigenvalues coincide (collinear points)");
  }

  GroundPlane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.d = -plane.normal.dot(centroid);
  if (plane.d < 0.0) {  // orient so the sensor origin is above the plane
    plane.normal = -plane.normal;
    plane.d = -plane.d;
  }
  plane.rms = std::sqrt(std::max(evals(0), 0.0));
  return plane;
}

}  // namespace

std::vector<int> segment_ground(const std::vector<Vec3>& points,
                                const GroundConfig& cfg) {
  const int n = static_cast<int>(points.size());
  if (n < cfg.min_ground_points) {
    std::ostringstream oss;
    oss << "segment_ground: scan has " << n << " points, need at least "
        << cfg.min_ground_points;
    throw InsufficientGround(oss.str());
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return points[a].z() < points[b].z();
  });

  const int n_seed = std::max(
      3, static_cast<int>(std::floor(cfg.seed_quantile * n)));
  std::vector<int> current(order.begin(),
                           order.begin() + std::min(n_seed, n));

  GroundPlane plane;
  for (int iter = 0; iter < std::max(1, cfg.refit_iterations); ++iter) {
    plane = fit_plane_indexed(points, current);
    current.clear();
    for (int i = 0; i < n; ++i) {
      if (std::abs(plane.normal.dot(points[i]) + plane.d) <=
          cfg.inlier_threshold_m) {
        current.push_back(i);
      }
    }
    if (static_cast<int>(current.size()) < 3) break;
  }

  if (static_cast<int>(current.size()) < cfg.min_ground_points) {
    std::ostringstream oss;
    oss << "segment_ground: only " << current.size()
        << " inliers, need at least " << cfg.min_ground_points;
    throw InsufficientGround(oss.str());
  }

  const double tilt =
      std::acos(std::clamp(std::abs(plane.normal.z()), 0.0, 1.0));
  if (tilt > deg_to_rad(cfg.max_tilt_deg)) {
    std::ostringstream oss;
    oss << "segment_ground: dominant low plane is tilted "
        << rad_to_deg(tilt) << " deg from +z (limit " << cfg.max_tilt_deg
        << "), not ground-like";
    throw InsufficientGround(oss.str());
  }

  std::sort(current.begin(), current.end());
  return current;
}

GroundPlane fit_plane_pca(const std::vector<Vec3>& points) {
  std::vector<int> all(points.size());
  std::iota(all.begin(), all.end(), 0);
  return fit_plane_indexed(points, all);
}

Rotation rotation_from_normals(const Vec3& n_lidar) {
  const Vec3 n = n_lidar.normalized();
  const double c = std::clamp(n.z(), -1.0, 1.0);  // e3 . n
  if (c < -0.999) {
    throw AntiparallelNormal(
        "rotation_from_normals: measured normal is antiparallel to +z");
  }
  if (c > 1.0 - 1e-12) {
    return Rotation::identity();
  }
  const Vec3 axis = Vec3::UnitZ().cross(n).normalized();
  return Rotation::exp(std::acos(c) * axis);
}

GroundObservation observe_ground(const std::vector<Vec3>& points,
                                 const GroundConfig& cfg) {
  GroundObservation obs;
  obs.inlier_indices = segment_ground(points, cfg);
  std::vector<Vec3> inliers;
  inliers.reserve(obs.inlier_indices.size());
  for (int i : obs.inlier_indices) inliers.push_back(points[i]);
  const GroundPlane plane = fit_plane_pca(inliers);
  obs.normal = plane.normal;
  obs.d = plane.d;
  obs.rms = plane.rms;
  obs.rot_ground_to_lidar = rotation_from_normals(plane.normal);
  return obs;
}

}  // namespace groundcal
