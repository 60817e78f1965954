#pragma once

#include <functional>
#include <vector>

#include "groundcal/geometry.hpp"
#include "groundcal/ground.hpp"
#include "groundcal/local_map.hpp"

// Ground-aware LiDAR odometry on the 12-D manifold state
// [attitude, position, body angular velocity, body linear velocity]
// with a constant-twist random-walk motion model and an iterated
// error-state Kalman (Gauss-Newton MAP) update per scan.

namespace groundcal {

struct LoConfig {
  double voxel_size_m = 0.1;
  int knn = 5;
  double plane_rms_gate_m = 0.1;
  int ieskf_max_iter = 10;
  double ieskf_tol = 1e-6;
  bool enable_ground_residual = true;
  double q_omega = 1e-4;          // rad^2/s^2 twist random walk
  double q_vel = 1e-2;            // m^2/s^4
  double point_noise_var = 4e-4;  // m^2 per point-to-plane row
  Vec3 ground_noise_diag = Vec3(1e-4, 1e-4, 1e-4);
  double p0_pose = 1e-8;          // initial pose variance (anchored at origin)
  double p0_twist = 1.0;          // initial twist variance
  int kinematics_window = 7;      // pose-track differentiation window
  GroundConfig ground;
};

struct LoState {
  ManifoldState x;
  Mat12 cov = Mat12::Identity();
};

// Deterministic motion model step (noise inputs exposed for Jacobian tests):
//   R' = R Exp(dt w), p' = p + dt R v, w' = w + dt eps_w, v' = v + dt eps_v.
ManifoldState motion_step(const ManifoldState& x, double dt,
                          const Vec3& eps_omega = Vec3::Zero(),
                          const Vec3& eps_vel = Vec3::Zero());

// Error-state transition of motion_step w.r.t. [theta, p, omega, v].
Mat12 motion_jacobian_state(const ManifoldState& x, double dt);
// ... and w.r.t. the noise [eps_omega, eps_vel].
Eigen::Matrix<double, 12, 6> motion_jacobian_noise(const ManifoldState& x,
                                                   double dt);

// Covariance propagation. Throws NonPositiveDt.
LoState predict(const LoState& prev, double dt, const LoConfig& cfg);

// Stacked linearized measurements: residual z, Jacobian rows H (m x 12),
// and per-row noise variance.
struct MeasurementBundle {
  Eigen::VectorXd z;
  Eigen::MatrixXd H;
  Eigen::VectorXd noise_var;
  int rows() const { return static_cast<int>(z.size()); }
};

// Point-to-plane residuals of `scan` (body frame) against the map at state x.
// Points with fewer than cfg.knn neighbors or a plane fit RMS above the gate
// are skipped.
MeasurementBundle point_to_plane_residuals(const ManifoldState& x,
                                           const std::vector<Vec3>& scan,
                                           const LocalMap& map,
                                           const LoConfig& cfg);

// Ground-plane residual rows: the first-scan alignment maps odometry
// coordinates to the ground frame; rows 1-2 penalize tilt of the per-scan
// ground normal (rotated into the ground frame), row 3 penalizes vertical
// translation.
void append_ground_residual(MeasurementBundle& bundle, const ManifoldState& x,
                            const Rotation& rot_odom_to_ground,
                            const Vec3& scan_normal, const LoConfig& cfg);

using MeasurementProvider = std::function<MeasurementBundle(const ManifoldState&)>;

// Iterated update: Gauss-Newton MAP on the error state with re-linearization
// (the provider is re-invoked at every iterate). Returns the converged state
// with the posterior covariance. Throws SingularNormalEquations.
LoState ieskf_update(const LoState& predicted,
                     const MeasurementProvider& provider, int max_iter,
                     double tol);

// Convenience overload with a fixed linearization (exact for linear models).
LoState ieskf_update(const LoState& predicted, const MeasurementBundle& bundle,
                     int max_iter, double tol);

// Central difference with first-order one-sided endpoints.
// Throws TooFewSamples (< 3) and NonPositiveDt (non-increasing timestamps).
std::vector<Vec3> central_difference(const std::vector<double>& t,
                                     const std::vector<Vec3>& v);

// Derivatives of a local least-squares polynomial fit (window samples,
// given order) evaluated at each sample time; lag-free and exact for
// polynomial signals up to `order` (and one degree higher at interior
// points by symmetry).
struct SeriesDerivatives {
  std::vector<Vec3> d1;
  std::vector<Vec3> d2;
};
SeriesDerivatives local_poly_derivatives(const std::vector<double>& t,
                                         const std::vector<Vec3>& v,
                                         int window, int order);

struct TimedPose {
  double t = 0.0;
  Rotation rot;  // scan frame -> odometry frame (first scan)
  Vec3 pos = Vec3::Zero();
};

// Per-scan output consumed by the calibration stage.
struct LidarOdomSample {
  double t = 0.0;
  Vec3 omega = Vec3::Zero();  // body frame [rad/s]
  Vec3 vel = Vec3::Zero();    // body frame [m/s]
  Vec3 alpha = Vec3::Zero();  // body frame angular acceleration [rad/s^2]
  Vec3 accel = Vec3::Zero();  // body frame linear acceleration [m/s^2]
  Vec3 normal = Vec3::UnitZ();  // per-scan ground normal, scan frame
  double d = 0.0;               // sensor height above ground
  Rotation rot_ground_to_lidar;
};

struct LoResult {
  std::vector<LidarOdomSample> samples;
  std::vector<TimedPose> poses;
  Rotation rot_odom_to_ground;  // from the first scan's ground observation
};

// Full odometry pass over the scans. Per-scan kinematics (omega, vel, alpha,
// accel) are extracted by local polynomial differentiation of the optimized
// pose track (lag-free), rotational rates via omega = d/dt log(Rk^T R(t)).
LoResult run_lo(const std::vector<double>& scan_times,
                const std::vector<std::vector<Vec3>>& scans,
                const LoConfig& cfg);

}  // namespace groundcal
