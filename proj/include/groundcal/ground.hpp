#pragma once

#include <vector>

#include "groundcal/geometry.hpp"

// Ground observation: extracts the ground plane from a single LiDAR scan and
// summarizes it as (alignment rotation, normal, signed height).
//
// Plane convention: inliers satisfy n . x + d = 0 with the sign fixed so that
// d > 0, i.e. the sensor origin lies on the positive side (above the ground).
// For a level sensor at height h this gives n = +e3 and d = h.

namespace groundcal {

struct GroundConfig {
  double seed_quantile = 0.2;       // fraction of lowest-z points used as seeds
  double inlier_threshold_m = 0.05; // point-to-plane inlier distance
  int min_ground_points = 50;
  int refit_iterations = 3;
  double max_tilt_deg = 45.0;       // reject planes steeper than this vs. +z
};

struct GroundPlane {
  Vec3 normal = Vec3::UnitZ();  // unit, oriented so that d > 0
  double d = 0.0;               // sensor height above the plane
  double rms = 0.0;             // RMS point-to-plane residual of the fit
};

struct GroundObservation {
  Rotation rot_ground_to_lidar;  // sends e3 to `normal`
  Vec3 normal = Vec3::UnitZ();   // ground normal in the LiDAR frame
  double d = 0.0;                // LiDAR height above ground
  double rms = 0.0;
  std::vector<int> inlier_indices;
};

// Iterative seeded plane extraction: seeds from the lowest-z quantile,
// then `refit_iterations` rounds of fit + inlier reselection.
// Throws InsufficientGround when fewer than min_ground_points survive or
// the dominant low plane is steeper than max_tilt_deg.
std::vector<int> segment_ground(const std::vector<Vec3>& points,
                                const GroundConfig& cfg = {});

// Least-squares plane through the points (PCA, smallest eigenvector).
// Throws DegenerateGeometry for < 3 points or a collinear set.
GroundPlane fit_plane_pca(const std::vector<Vec3>& points);

// Rotation mapping ground coordinates to LiDAR coordinates, i.e. the
// minimal rotation with rot * e3 = n_lidar. Identity when n_lidar is
// (numerically) parallel to e3; throws AntiparallelNormal when the dot
// product is below -0.999.
Rotation rotation_from_normals(const Vec3& n_lidar);

// Full per-scan ground observation: segmentation + fit + alignment.
GroundObservation observe_ground(const std::vector<Vec3>& points,
                                 const GroundConfig& cfg = {});

}  // namespace groundcal
