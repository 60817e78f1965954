#pragma once

#include <vector>

#include "groundcal/geometry.hpp"

// IMU conditioning: zero-phase low-pass filtering, downsampling to the scan
// timestamps, gravity-aligned attitude (Madgwick AHRS), and the coarse
// integer-frame time offset between the IMU and LiDAR-odometry rate series.

namespace groundcal {

struct ImuConfig {
  double filter_cutoff_hz = 10.0;
  double madgwick_beta = 0.1;
  double gravity = 9.81;
  // AHRS acceleration rejection: skip the accelerometer correction when
  // | ||a|| - g | exceeds this (keeps tilt honest through arcs).
  double accel_gate_mps2 = 0.1;
  int max_lag_frames = 50;
  double rate_jitter_tol = 0.05;  // allowed deviation from the median dt
};

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // specific force, m/s^2
};

struct ImuStream {
  std::vector<double> t;
  std::vector<Vec3> gyro;
  std::vector<Vec3> accel;
  std::size_t size() const { return t.size(); }
};

// IMU-side series sampled at the LiDAR timestamps.
struct ImuProcessed {
  std::vector<double> t;                     // LiDAR-clock timestamps
  std::vector<Vec3> omega;                   // filtered angular rate
  std::vector<Vec3> alpha;                   // d/dt omega (central difference)
  std::vector<Vec3> accel;                   // filtered specific force
  std::vector<Rotation> rot_imu_to_ground;   // gravity-aligned, yaw arbitrary
  std::size_t size() const { return t.size(); }
};

// Second-order Butterworth low-pass applied forward and backward (zero
// phase), with odd-reflection edge padding of 3x the filter order and
// steady-state initial conditions. Unit DC gain.
// Throws StreamTooShort (< 6 samples).
std::vector<double> zero_phase_lowpass(const std::vector<double>& x,
                                       double rate_hz, double cutoff_hz);

// Validates a uniform sample rate (median dt, jitter tolerance) and filters
// all six channels. Throws StreamTooShort / NonUniformRate.
ImuStream filter_stream(const ImuStream& in, const ImuConfig& cfg);

// Linear interpolation of a vector series at the query times.
// Throws OutOfRangeTimestamp when a query lies outside [t.front, t.back].
std::vector<Vec3> interp_series(const std::vector<double>& t,
                                const std::vector<Vec3>& v,
                                const std::vector<double>& query);

// Madgwick AHRS (IMU variant) over the filtered stream. Gyro integration
// uses the exact quaternion exponential; the accelerometer gradient
// correction is gated on acceleration magnitude and the attitude is
// initialized from the first accelerometer sample (tilt only, zero yaw).
// Returns rot_imu_to_ground per input sample.
std::vector<Rotation> madgwick_attitude(const ImuStream& filtered,
                                        const ImuConfig& cfg);

// Spherical interpolation of an attitude series at the query times.
std::vector<Rotation> attitude_at(const std::vector<double>& t,
                                  const std::vector<Rotation>& rot,
                                  const std::vector<double>& query);

// Integer lag l* maximizing the normalized cross-correlation
// corr(imu[k + l], lo[k]) over the valid overlap, |l| <= max_lag.
// Ties break toward the smallest |l|. Throws SeriesTooShort.
int coarse_time_offset(const std::vector<double>& imu_mag,
                       const std::vector<double>& lo_mag, int max_lag);

// Full conditioning pipeline: filter -> interpolate at scan times -> AHRS ->
// angular acceleration by central difference.
ImuProcessed process_imu(const ImuStream& raw,
                         const std::vector<double>& lidar_times,
                         const ImuConfig& cfg);

}  // namespace groundcal
