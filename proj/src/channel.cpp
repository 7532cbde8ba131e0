// SPDX-License-Identifier: Apache-2.0
#include "sixdma/channel.hpp"

#include <cmath>

namespace sixdma::channel {

namespace {

constexpr double kPoleEps = 1e-9;
const double kPatternPeak = std::sqrt(1.5);

// Orientation gain without the sqrt(3/2) element factor (that factor lives in
// the collapsed sigma_hat).  Polarized: z^T (rho rho^T - I) p_r with z the
// rotated local vertical.  Unpolarized: |cos(theta_local)|.
double orientation_gain(const Mat3& rot, const Vec3& rho, const Vec3& p_r,
                        PolarizationMode mode) {
  const Vec3 z = rot.col(2);
  if (mode == PolarizationMode::Unpolarized) {
    double s = z.dot(rho);
    return std::sqrt(std::max(0.0, 1.0 - s * s));
  }
  return z.dot(rho) * rho.dot(p_r) - z.dot(p_r);
}

// Derivative of orientation_gain for one Euler angle, given the rotation
// derivative.  The unpolarized pattern has a removable kink at the pole; the
// derivative is forced to zero inside the guard band there.
double orientation_gain_derivative(const Mat3& rot, const Mat3& drot, const Vec3& rho,
                                   const Vec3& p_r, PolarizationMode mode) {
  const Vec3 zd = drot.col(2);
  if (mode == PolarizationMode::Unpolarized) {
    const Vec3 z = rot.col(2);
    double s = z.dot(rho);
    double g = std::sqrt(std::max(0.0, 1.0 - s * s));
    if (g < kPoleEps) return 0.0;
    return -s * zd.dot(rho) / g;
  }
  return zd.dot(rho) * rho.dot(p_r) - zd.dot(p_r);
}

}  // namespace

UserPaths make_user_paths(const VecX& theta, const VecX& phi, const CMat& prm,
                          const Mat3X& rx_pol) {
  const int lt = static_cast<int>(theta.size());
  if (phi.size() != lt) throw std::invalid_argument("make_user_paths: theta/phi size mismatch");
  if (prm.rows() != lt)
    throw std::invalid_argument("make_user_paths: path response rows must match transmit paths");
  if (rx_pol.cols() != lt)
    throw std::invalid_argument("make_user_paths: one receive polarization per transmit path required");

  UserPaths up;
  up.theta = theta;
  up.phi = phi;
  up.prm = prm;
  up.rho.resize(3, lt);
  up.rx_pol.resize(3, lt);
  for (int l = 0; l < lt; ++l) {
    if (std::abs(theta[l]) > 0.5 * kPi + 1e-12)
      throw std::invalid_argument("make_user_paths: elevation outside [-pi/2, pi/2]");
    const Vec3 rho = propagation_dir(theta[l], phi[l]);
    up.rho.col(l) = rho;
    Vec3 p = rx_pol.col(l);
    p -= rho * rho.dot(p);  // transverse part only
    double norm = p.norm();
    if (norm < 1e-12)
      throw std::invalid_argument("make_user_paths: receive polarization parallel to propagation direction");
    up.rx_pol.col(l) = p / norm;
  }
  return up;
}

CollapsedPathGains collapse_gains(const PathSet& paths) {
  CollapsedPathGains g;
  g.sigma_hat.reserve(paths.users.size());
  for (const auto& up : paths.users)
    g.sigma_hat.push_back(kPatternPeak * up.prm.rowwise().sum());
  return g;
}

Vec3 propagation_dir(double theta, double phi) {
  return Vec3(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
              std::sin(theta));
}

LcsAngles lcs_angles(const Mat3& rot, const Vec3& rho) {
  const Vec3 local = rot.transpose() * rho;
  LcsAngles out;
  out.theta = std::asin(std::clamp(local.z(), -1.0, 1.0));
  double xy = std::hypot(local.x(), local.y());
  if (xy < 1e-12) {
    out.at_pole = true;
    out.phi = 0.0;
  } else {
    out.phi = std::atan2(local.y(), local.x());
    if (out.phi < 0.0) out.phi += 2.0 * kPi;
  }
  return out;
}

double pattern_gain(double theta_lcs) { return kPatternPeak * std::abs(std::cos(theta_lcs)); }

std::pair<Vec3, Vec3> spherical_basis(double theta, double phi) {
  Vec3 e_theta(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
               -std::cos(theta));
  Vec3 e_phi(-std::sin(phi), std::cos(phi), 0.0);
  return {e_theta, e_phi};
}

double polarization_gain(const Mat3& rot, const Vec3& rho, const Vec3& p_r) {
  const Vec3 z = rot.col(2);
  double s = z.dot(rho);
  double denom = std::sqrt(std::max(0.0, 1.0 - s * s));
  if (denom < kPoleEps)
    throw PoleSingularity("polarization_gain: direction at a local pole");
  return (s * rho.dot(p_r) - z.dot(p_r)) / denom;
}

double combined_gain(const Mat3& rot, const Vec3& rho, const Vec3& p_r) {
  return kPatternPeak * orientation_gain(rot, rho, p_r, PolarizationMode::Polarized);
}

CMat channel_general(const geometry::ArrayGeometry& geom,
                     const std::vector<geometry::Pose>& poses, const PathSet& paths) {
  const int n = geom.n_subarrays;
  const int m = geom.antennas_per_subarray;
  const int k_users = paths.n_users();
  const Mat3X pos = antenna_positions(geom, poses);
  const double k2 = 2.0 * kPi / paths.wavelength;

  CMat h(n * m, k_users);
  for (int k = 0; k < k_users; ++k) {
    const UserPaths& up = paths.users[k];
    const int lt = up.n_tx_paths();

    // Per-(sub-array, path) gain, factored pattern * polarization.
    MatX amp(n, lt);
    for (int s = 0; s < n; ++s) {
      const Mat3 rot = geometry::rotation_matrix(poses[s].angles);
      for (int l = 0; l < lt; ++l) {
        const Vec3 rho = up.rho.col(l);
        const LcsAngles lcs = lcs_angles(rot, rho);
        amp(s, l) = pattern_gain(lcs.theta) * polarization_gain(rot, rho, up.rx_pol.col(l));
      }
    }

    // Response-vector matrix, one column per antenna.
    CMat g(lt, n * m);
    for (int l = 0; l < lt; ++l) {
      const Vec3 rho = up.rho.col(l);
      for (int s = 0; s < n * m; ++s)
        g(l, s) = std::polar(1.0, k2 * pos.col(s).dot(rho));
    }
    const CVec resp = up.prm.rowwise().sum();

    // Gain rows replicated per antenna, applied entrywise to g^H, then
    // contracted with the accumulated path response.
    for (int s = 0; s < n; ++s)
      for (int i = 0; i < m; ++i) {
        cplx acc = 0.0;
        for (int l = 0; l < lt; ++l)
          acc += amp(s, l) * std::conj(g(l, s * m + i)) * resp(l);
        h(s * m + i, k) = acc;
      }
  }
  return h;
}

CVec channel_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                   const CVec& sigma_hat, double wavelength, PolarizationMode mode) {
  const int m = static_cast<int>(offsets.cols());
  const int lt = up.n_tx_paths();
  const double k2 = 2.0 * kPi / wavelength;
  const Mat3 rot = geometry::rotation_matrix(pose.angles);

  CVec out = CVec::Zero(m);
  for (int l = 0; l < lt; ++l) {
    const Vec3 rho = up.rho.col(l);
    const double gain = orientation_gain(rot, rho, up.rx_pol.col(l), mode);
    const cplx coef = std::conj(sigma_hat(l)) * gain;
    const Vec3 rot_rho = rot.transpose() * rho;
    const double center_phase = k2 * pose.center.dot(rho);
    for (int i = 0; i < m; ++i) {
      double phase = center_phase + k2 * offsets.col(i).dot(rot_rho);
      out(i) += coef * std::polar(1.0, phase);
    }
  }
  return out;
}

CMat channel_fast(const geometry::ArrayGeometry& geom,
                  const std::vector<geometry::Pose>& poses, const PathSet& paths,
                  const CollapsedPathGains& gains, PolarizationMode mode) {
  if (static_cast<int>(poses.size()) != geom.n_subarrays)
    throw std::invalid_argument("channel_fast: pose count does not match sub-array count");
  if (gains.sigma_hat.size() != paths.users.size())
    throw std::invalid_argument("channel_fast: collapsed gains do not match user count");
  const int n = geom.n_subarrays;
  const int m = geom.antennas_per_subarray;
  CMat h(n * m, paths.n_users());
  for (int k = 0; k < paths.n_users(); ++k)
    for (int s = 0; s < n; ++s)
      h.col(k).segment(s * m, m) = channel_block(geom.offsets, poses[s], paths.users[k],
                                                 gains.sigma_hat[k], paths.wavelength, mode)
                                       .conjugate();
  return h;
}

CMat3X grad_center_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                         const CVec& sigma_hat, double wavelength, PolarizationMode mode) {
  const int m = static_cast<int>(offsets.cols());
  const int lt = up.n_tx_paths();
  const double k2 = 2.0 * kPi / wavelength;
  const Mat3 rot = geometry::rotation_matrix(pose.angles);
  const cplx jk2(0.0, k2);

  CMat3X out = CMat3X::Zero(3, m);
  for (int l = 0; l < lt; ++l) {
    const Vec3 rho = up.rho.col(l);
    const double gain = orientation_gain(rot, rho, up.rx_pol.col(l), mode);
    const cplx coef = jk2 * std::conj(sigma_hat(l)) * gain;
    const Vec3 rot_rho = rot.transpose() * rho;
    const double center_phase = k2 * pose.center.dot(rho);
    for (int i = 0; i < m; ++i) {
      double phase = center_phase + k2 * offsets.col(i).dot(rot_rho);
      const cplx factor = coef * std::polar(1.0, phase);
      out.col(i) += factor * rho.cast<cplx>();
    }
  }
  return out;
}

CMat3X grad_angles_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                         const CVec& sigma_hat, double wavelength, PolarizationMode mode) {
  const int m = static_cast<int>(offsets.cols());
  const int lt = up.n_tx_paths();
  const double k2 = 2.0 * kPi / wavelength;
  const Mat3 rot = geometry::rotation_matrix(pose.angles);
  const Mat3 drot[3] = {
      geometry::rotation_matrix_derivative(pose.angles, geometry::EulerAxis::Alpha),
      geometry::rotation_matrix_derivative(pose.angles, geometry::EulerAxis::Beta),
      geometry::rotation_matrix_derivative(pose.angles, geometry::EulerAxis::Gamma)};
  const cplx jk2(0.0, k2);

  CMat3X out = CMat3X::Zero(3, m);
  for (int l = 0; l < lt; ++l) {
    const Vec3 rho = up.rho.col(l);
    const Vec3 p_r = up.rx_pol.col(l);
    const double gain = orientation_gain(rot, rho, p_r, mode);
    const cplx sig = std::conj(sigma_hat(l));
    const Vec3 rot_rho = rot.transpose() * rho;
    const double center_phase = k2 * pose.center.dot(rho);
    for (int ax = 0; ax < 3; ++ax) {
      const Vec3 drot_rho = drot[ax].transpose() * rho;
      const double dgain = orientation_gain_derivative(rot, drot[ax], rho, p_r, mode);
      for (int i = 0; i < m; ++i) {
        double phase = center_phase + k2 * offsets.col(i).dot(rot_rho);
        const cplx unit = std::polar(1.0, phase);
        // phase term plus gain term of the product rule
        out(ax, i) += sig * unit * (jk2 * offsets.col(i).dot(drot_rho) * gain + dgain);
      }
    }
  }
  return out;
}

namespace {

CMat3X place_block(const geometry::ArrayGeometry& geom, const CMat3X& block, int subarray) {
  CMat3X out = CMat3X::Zero(3, geom.total_antennas());
  out.middleCols(subarray * geom.antennas_per_subarray, geom.antennas_per_subarray) = block;
  return out;
}

void check_grad_args(const geometry::ArrayGeometry& geom,
                     const std::vector<geometry::Pose>& poses, const PathSet& paths, int user,
                     int subarray) {
  if (static_cast<int>(poses.size()) != geom.n_subarrays)
    throw std::invalid_argument("channel gradient: pose count does not match sub-array count");
  if (user < 0 || user >= paths.n_users())
    throw std::invalid_argument("channel gradient: user index out of range");
  if (subarray < 0 || subarray >= geom.n_subarrays)
    throw std::invalid_argument("channel gradient: sub-array index out of range");
}

}  // namespace

CMat3X channel_grad_center(const geometry::ArrayGeometry& geom,
                           const std::vector<geometry::Pose>& poses, const PathSet& paths,
                           const CollapsedPathGains& gains, int user, int subarray,
                           PolarizationMode mode) {
  check_grad_args(geom, poses, paths, user, subarray);
  return place_block(geom,
                     grad_center_block(geom.offsets, poses[subarray], paths.users[user],
                                       gains.sigma_hat[user], paths.wavelength, mode),
                     subarray);
}

CMat3X channel_grad_angles(const geometry::ArrayGeometry& geom,
                           const std::vector<geometry::Pose>& poses, const PathSet& paths,
                           const CollapsedPathGains& gains, int user, int subarray,
                           PolarizationMode mode) {
  check_grad_args(geom, poses, paths, user, subarray);
  return place_block(geom,
                     grad_angles_block(geom.offsets, poses[subarray], paths.users[user],
                                       gains.sigma_hat[user], paths.wavelength, mode),
                     subarray);
}

Mat3X vertical_rx_polarization(const VecX& theta, const VecX& phi) {
  Mat3X out(3, theta.size());
  for (int l = 0; l < theta.size(); ++l)
    out.col(l) = spherical_basis(theta[l], phi[l]).first;
  return out;
}

}  // namespace sixdma::channel
