#include "groundcal/lo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace groundcal {

namespace {

struct NeighborPlane {
  Vec3 normal;
  Vec3 centroid;
  double rms;
};

std::optional<NeighborPlane> fit_neighbor_plane(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 3) return std::nullopt;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= n;
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 q = p - c;
    cov += q * q.transpose();
  }
  cov /= n;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  NeighborPlane out;
  out.normal = eig.eigenvectors().col(0).normalized();
  out.centroid = c;
  out.rms = std::sqrt(std::max(eig.eigenvalues()(0), 0.0));
  return out;
}

void check_increasing(const std::vector<double>& t, const char* where) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      std::ostringstream oss;
      oss << where << ": timestamps not strictly increasing at index " << i
          << " (" << t[i - 1] << " -> " << t[i] << ")";
      throw NonPositiveDt(oss.str());
    }
  }
}

// Derivative (and second derivative) of the least-squares polynomial through
// (times, values) evaluated at t0. Times are shifted/scaled for conditioning.
void poly_derivs_at(const std::vector<double>& times,
                    const std::vector<Vec3>& values, double t0, int order,
                    Vec3* d1, Vec3* d2) {
  const int n = static_cast<int>(times.size());
  const int ord = std::min(order, n - 1);
  double scale = 1e-12;
  for (double t : times) scale = std::max(scale, std::abs(t - t0));
  Eigen::MatrixXd a(n, ord + 1);
  Eigen::MatrixXd rhs(n, 3);
  for (int i = 0; i < n; ++i) {
    const double tau = (times[i] - t0) / scale;
    double pw = 1.0;
    for (int j = 0; j <= ord; ++j) {
      a(i, j) = pw;
      pw *= tau;
    }
    rhs.row(i) = values[i].transpose();
  }
  const Eigen::MatrixXd coef =
      (a.transpose() * a).ldlt().solve(a.transpose() * rhs);
  *d1 = (ord >= 1) ? Vec3(coef.row(1).transpose() / scale) : Vec3::Zero();
  *d2 = (ord >= 2) ? Vec3(2.0 * coef.row(2).transpose() / (scale * scale))
                   : Vec3::Zero();
}

}  // namespace

ManifoldState motion_step(const ManifoldState& x, double dt,
                          const Vec3& eps_omega, const Vec3& eps_vel) {
  ManifoldState out;
  out.rot = x.rot * Rotation::exp(dt * x.omega);
  out.pos = x.pos + dt * (x.rot * x.vel);
  out.omega = x.omega + dt * eps_omega;
  out.vel = x.vel + dt * eps_vel;
  return out;
}

Mat12 motion_jacobian_state(const ManifoldState& x, double dt) {
  Mat12 f = Mat12::Identity();
  const Vec3 phi = dt * x.omega;
  f.block<3, 3>(0, 0) = exp_so3(phi).transpose();
  f.block<3, 3>(0, 6) = dt * right_jacobian_so3(phi);
  f.block<3, 3>(3, 0) = -dt * x.rot.matrix() * skew(x.vel);
  f.block<3, 3>(3, 9) = dt * x.rot.matrix();
  return f;
}

Eigen::Matrix<double, 12, 6> motion_jacobian_noise(const ManifoldState&,
                                                   double dt) {
  Eigen::Matrix<double, 12, 6> fw = Eigen::Matrix<double, 12, 6>::Zero();
  fw.block<3, 3>(6, 0) = dt * Mat3::Identity();
  fw.block<3, 3>(9, 3) = dt * Mat3::Identity();
  return fw;
}

LoState predict(const LoState& prev, double dt, const LoConfig& cfg) {
  if (!(dt > 0.0)) {
    std::ostringstream oss;
    oss << "predict: dt must be positive, got " << dt;
    throw NonPositiveDt(oss.str());
  }
  LoState out;
  out.x = motion_step(prev.x, dt);
  const Mat12 f = motion_jacobian_state(prev.x, dt);
  const Eigen::Matrix<double, 12, 6> fw = motion_jacobian_noise(prev.x, dt);
  Eigen::Matrix<double, 6, 6> q = Eigen::Matrix<double, 6, 6>::Zero();
  q.topLeftCorner<3, 3>() = cfg.q_omega * Mat3::Identity();
  q.bottomRightCorner<3, 3>() = cfg.q_vel * Mat3::Identity();
  const Mat12 cov = f * prev.cov * f.transpose() + fw * q * fw.transpose();
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

MeasurementBundle point_to_plane_residuals(const ManifoldState& x,
                                           const std::vector<Vec3>& scan,
                                           const LocalMap& map,
                                           const LoConfig& cfg) {
  std::vector<double> zs;
  std::vector<Eigen::Matrix<double, 1, 12>> hs;
  zs.reserve(scan.size());
  hs.reserve(scan.size());

  const Mat3 rot = x.rot.matrix();
  for (const auto& pb : scan) {
    const Vec3 pw = rot * pb + x.pos;
    const auto neigh = map.knn(pw, cfg.knn);
    if (static_cast<int>(neigh.size()) < cfg.knn) continue;
    const auto plane = fit_neighbor_plane(neigh);
    if (!plane || plane->rms > cfg.plane_rms_gate_m) continue;
    const Vec3& u = plane->normal;
    Eigen::Matrix<double, 1, 12> h = Eigen::Matrix<double, 1, 12>::Zero();
    h.segment<3>(0) = -((rot.transpose() * u).cross(pb)).transpose();
    h.segment<3>(3) = u.transpose();
    zs.push_back(u.dot(pw - plane->centroid));
    hs.push_back(h);
  }

  MeasurementBundle b;
  const int m = static_cast<int>(zs.size());
  b.z.resize(m);
  b.H.resize(m, 12);
  b.noise_var = Eigen::VectorXd::Constant(m, cfg.point_noise_var);
  for (int i = 0; i < m; ++i) {
    b.z(i) = zs[i];
    b.H.row(i) = hs[i];
  }
  return b;
}

void append_ground_residual(MeasurementBundle& bundle, const ManifoldState& x,
                            const Rotation& rot_odom_to_ground,
                            const Vec3& scan_normal, const LoConfig& cfg) {
  const Mat3 g = rot_odom_to_ground.matrix();
  const Mat3 rot = x.rot.matrix();
  const Vec3 n_ground = g * (rot * scan_normal);

  const int m = bundle.rows();
  bundle.z.conservativeResize(m + 3);
  bundle.H.conservativeResize(m + 3, 12);
  bundle.noise_var.conservativeResize(m + 3);
  bundle.H.block<3, 12>(m, 0).setZero();

  // Rows 1-2: the per-scan ground normal, expressed in the ground frame,
  // must stay vertical.
  const Mat3 dn = -(g * rot * skew(scan_normal));
  bundle.z(m) = n_ground.x();
  bundle.z(m + 1) = n_ground.y();
  bundle.H.block<1, 3>(m, 0) = dn.row(0);
  bundle.H.block<1, 3>(m + 1, 0) = dn.row(1);
  // Row 3: no vertical displacement of the sensor origin.
  bundle.z(m + 2) = g.row(2).dot(x.pos);
  bundle.H.block<1, 3>(m + 2, 3) = g.row(2);
  bundle.noise_var.segment<3>(m) = cfg.ground_noise_diag;
}

LoState ieskf_update(const LoState& predicted,
                     const MeasurementProvider& provider, int max_iter,
                     double tol) {
  const Mat12 p_sym = 0.5 * (predicted.cov + predicted.cov.transpose());
  Eigen::LDLT<Mat12> pldlt(p_sym);
  if (pldlt.info() != Eigen::Success) {
    throw SingularNormalEquations(
        "ieskf_update: prior covariance is not factorizable");
  }
  const Mat12 p_inv = pldlt.solve(Mat12::Identity());

  ManifoldState xi = predicted.x;
  Mat12 n_mat = Mat12::Identity();
  for (int iter = 0; iter < std::max(1, max_iter); ++iter) {
    const MeasurementBundle b = provider(xi);
    const Vec12 dx = boxminus(xi, predicted.x);
    Mat12 j = Mat12::Identity();
    j.topLeftCorner<3, 3>() = right_jacobian_inv_so3(dx.head<3>());

    n_mat = j.transpose() * p_inv * j;
    Vec12 g = j.transpose() * (p_inv * dx);
    if (b.rows() > 0) {
      const Eigen::VectorXd w = b.noise_var.cwiseInverse();
      n_mat.noalias() += b.H.transpose() * w.asDiagonal() * b.H;
      g.noalias() += b.H.transpose() * (w.asDiagonal() * b.z);
    }

    Eigen::LDLT<Mat12> nldlt(n_mat);
    if (nldlt.info() != Eigen::Success || nldlt.rcond() < 1e-15) {
      throw SingularNormalEquations(
          "ieskf_update: normal equations numerically singular");
    }
    const Vec12 delta = nldlt.solve(-g);
    xi = boxplus(xi, delta);
    if (delta.norm() < tol) break;
  }

  LoState out;
  out.x = xi;
  const Mat12 cov = Eigen::LDLT<Mat12>(n_mat).solve(Mat12::Identity());
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

LoState ieskf_update(const LoState& predicted, const MeasurementBundle& bundle,
                     int max_iter, double tol) {
  // Fixed linearization: the residual is re-evaluated with the linear model
  // z(x) = z0 + H (x [-] x_hat), which is exact for linear measurements.
  const ManifoldState x_hat = predicted.x;
  const auto provider = [&](const ManifoldState& xi) {
    MeasurementBundle b = bundle;
    if (b.rows() > 0) {
      b.z = bundle.z + bundle.H * boxminus(xi, x_hat);
    }
    return b;
  };
  return ieskf_update(predicted, provider, max_iter, tol);
}

std::vector<Vec3> central_difference(const std::vector<double>& t,
                                     const std::vector<Vec3>& v) {
  const int n = static_cast<int>(t.size());
  if (n != static_cast<int>(v.size())) {
    throw Error("central_difference: time/value size mismatch");
  }
  if (n < 3) {
    std::ostringstream oss;
    oss << "central_difference: need at least 3 samples, got " << n;
    throw TooFewSamples(oss.str());
  }
  check_increasing(t, "central_difference");
  std::vector<Vec3> out(n);
  out[0] = (v[1] - v[0]) / (t[1] - t[0]);
  out[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
  for (int k = 1; k < n - 1; ++k) {
    out[k] = (v[k + 1] - v[k - 1]) / (t[k + 1] - t[k - 1]);
  }
  return out;
}

SeriesDerivatives local_poly_derivatives(const std::vector<double>& t,
                                         const std::vector<Vec3>& v,
                                         int window, int order) {
  const int n = static_cast<int>(t.size());
  if (n != static_cast<int>(v.size())) {
    throw Error("local_poly_derivatives: time/value size mismatch");
  }
  if (n < 2) {
    throw TooFewSamples("local_poly_derivatives: need at least 2 samples");
  }
  check_increasing(t, "local_poly_derivatives");
  const int w = std::clamp(window, 2, n);

  SeriesDerivatives out;
  out.d1.resize(n);
  out.d2.resize(n);
  std::vector<double> wt(w);
  std::vector<Vec3> wv(w);
  for (int k = 0; k < n; ++k) {
    const int lo = std::clamp(k - w / 2, 0, n - w);
    for (int i = 0; i < w; ++i) {
      wt[i] = t[lo + i];
      wv[i] = v[lo + i];
    }
    poly_derivs_at(wt, wv, t[k], order, &out.d1[k], &out.d2[k]);
  }
  return out;
}

LoResult run_lo(const std::vector<double>& scan_times,
                const std::vector<std::vector<Vec3>>& scans,
                const LoConfig& cfg) {
  const int n = static_cast<int>(scans.size());
  if (n == 0 || scan_times.size() != scans.size()) {
    throw TooFewSamples("run_lo: empty scan list or size mismatch");
  }
  check_increasing(scan_times, "run_lo");

  std::vector<GroundObservation> obs(n);
  for (int k = 0; k < n; ++k) {
    try {
      obs[k] = observe_ground(scans[k], cfg.ground);
    } catch (const Error& e) {
      std::ostringstream oss;
      oss << "run_lo: ground observation failed on scan " << k << ": "
          << e.what();
      throw InsufficientGround(oss.str());
    }
  }

  LoResult result;
  result.rot_odom_to_ground = obs[0].rot_ground_to_lidar.transposed();

  LocalMap map(cfg.voxel_size_m);
  map.insert(scans[0]);

  LoState st;
  st.cov = Mat12::Identity();
  st.cov.topLeftCorner<6, 6>() *= cfg.p0_pose;
  st.cov.bottomRightCorner<6, 6>() *= cfg.p0_twist;

  result.poses.resize(n);
  result.poses[0] = TimedPose{scan_times[0], Rotation::identity(),
                              Vec3::Zero()};

  std::vector<Vec3> world;
  for (int k = 1; k < n; ++k) {
    const double dt = scan_times[k] - scan_times[k - 1];
    const LoState pred = predict(st, dt, cfg);
    const auto provider = [&](const ManifoldState& xi) {
      MeasurementBundle b = point_to_plane_residuals(xi, scans[k], map, cfg);
      if (cfg.enable_ground_residual) {
        append_ground_residual(b, xi, result.rot_odom_to_ground,
                               obs[k].normal, cfg);
      }
      return b;
    };
    st = ieskf_update(pred, provider, cfg.ieskf_max_iter, cfg.ieskf_tol);
    result.poses[k] = TimedPose{scan_times[k], st.x.rot, st.x.pos};

    world.clear();
    world.reserve(scans[k].size());
    const Mat3 rot = st.x.rot.matrix();
    for (const auto& p : scans[k]) world.push_back(rot * p + st.x.pos);
    map.insert(world);
  }

  // Kinematics from the optimized pose track: lag-free local polynomial
  // differentiation. Rotational rates use the exact identities
  // omega_k = d/dt log(Rk^T R(t)) and alpha_k = d^2/dt^2 log(Rk^T R(t))
  // evaluated at t_k, where the log is small within the window.
  const int w = std::clamp(cfg.kinematics_window, 2, n);
  std::vector<Vec3> positions(n);
  for (int k = 0; k < n; ++k) positions[k] = result.poses[k].pos;

  std::vector<Vec3> omega(n, Vec3::Zero());
  std::vector<Vec3> alpha(n, Vec3::Zero());
  std::vector<Vec3> vel_w(n, Vec3::Zero());
  if (n >= 2) {
    std::vector<double> wt(w);
    std::vector<Vec3> wphi(w);
    for (int k = 0; k < n; ++k) {
      const int lo = std::clamp(k - w / 2, 0, n - w);
      const Mat3 rk_t = result.poses[k].rot.matrix().transpose();
      for (int i = 0; i < w; ++i) {
        wt[i] = scan_times[lo + i];
        wphi[i] = log_so3(rk_t * result.poses[lo + i].rot.matrix());
      }
      poly_derivs_at(wt, wphi, scan_times[k], 3, &omega[k], &alpha[k]);
    }
    vel_w = local_poly_derivatives(scan_times, positions, w, 3).d1;
  }
  std::vector<Vec3> acc_w(n, Vec3::Zero());
  if (n >= 2) {
    acc_w = local_poly_derivatives(scan_times, vel_w, w, 3).d1;
  }

  result.samples.resize(n);
  for (int k = 0; k < n; ++k) {
    LidarOdomSample& s = result.samples[k];
    s.t = scan_times[k];
    const Mat3 rk_t = result.poses[k].rot.matrix().transpose();
    s.omega = omega[k];
    s.alpha = alpha[k];
    s.vel = rk_t * vel_w[k];
    s.accel = rk_t * acc_w[k];
    s.normal = obs[k].normal;
    s.d = obs[k].d;
    s.rot_ground_to_lidar = obs[k].rot_ground_to_lidar;
  }
  return result;
}

}  // namespace groundcal
