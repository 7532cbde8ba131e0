// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "sixdma/geometry.hpp"
#include "sixdma/types.hpp"

namespace sixdma::channel {

// Raised by the factored polarization path when the local direction is within
// 1e-9 of a local pole; the combined-gain path stays finite there.
struct PoleSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multi-path geometry and response for one user.  Everything here is fixed
// while sub-arrays move; only the array side of the channel changes.
struct UserPaths {
  VecX theta;    // transmit elevation per path, [-pi/2, pi/2]
  VecX phi;      // transmit azimuth per path
  Mat3X rho;     // 3 x L_t unit propagation directions, derived from theta/phi
  CMat prm;      // L_t x L_r path response matrix
  Mat3X rx_pol;  // 3 x L_t unit receive polarization, orthogonal to rho

  int n_tx_paths() const { return static_cast<int>(theta.size()); }
  int n_rx_paths() const { return static_cast<int>(prm.cols()); }
};

// Validates sizes, builds the direction vectors and projects each receive
// polarization onto the plane orthogonal to its propagation direction
// (renormalized; residual alignment below 1e-12).
UserPaths make_user_paths(const VecX& theta, const VecX& phi, const CMat& prm,
                          const Mat3X& rx_pol);

struct PathSet {
  double wavelength = 0.0;  // carrier wavelength [m]
  std::vector<UserPaths> users;

  int n_users() const { return static_cast<int>(users.size()); }
};

// Per-user collapsed gains sigma_hat[k](l) = sqrt(3/2) * sum_l' prm(l, l').
// Computed once per scenario; the fast channel path consumes these.
struct CollapsedPathGains {
  std::vector<CVec> sigma_hat;
};

CollapsedPathGains collapse_gains(const PathSet& paths);

// Polarized keeps the full orientation-dependent polarization mismatch;
// Unpolarized replaces the mismatch factor by 1 and keeps only the element
// power pattern.  Used by the mismatched-model baseline.
enum class PolarizationMode { Polarized, Unpolarized };

struct LcsAngles {
  double theta = 0.0;  // local elevation, [-pi/2, pi/2]
  double phi = 0.0;    // local azimuth, [0, 2*pi); 0 by convention at a pole
  bool at_pole = false;
};

// Unit direction [cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)].
Vec3 propagation_dir(double theta, double phi);

// Direction angles seen in the rotated local frame of an element.
LcsAngles lcs_angles(const Mat3& rot, const Vec3& rho);

// Element amplitude pattern sqrt(3/2) * |cos(theta_local)|.
double pattern_gain(double theta_lcs);

// Unit vectors of increasing theta and phi at a direction; both orthogonal
// to the direction itself.
std::pair<Vec3, Vec3> spherical_basis(double theta, double phi);

// Polarization mismatch between the rotated element (vertical response) and
// the receive polarization p_r.  Factored form; throws PoleSingularity when
// |cos(theta_local)| < 1e-9.
double polarization_gain(const Mat3& rot, const Vec3& rho, const Vec3& p_r);

// Product of pattern and polarization gain in closed form,
// sqrt(3/2) * e3^T R^T (rho rho^T - I) p_r.  Finite everywhere.
double combined_gain(const Mat3& rot, const Vec3& rho, const Vec3& p_r);

// Reference assembly through the factored per-path gain matrix and the
// explicit response-vector matrix.  MN x K, column k = user k, rows ordered
// sub-array-major like antenna_positions.  Polarized only; may throw
// PoleSingularity near poles.
CMat channel_general(const geometry::ArrayGeometry& geom,
                     const std::vector<geometry::Pose>& poses, const PathSet& paths);

// Production path using the collapsed gains and the closed-form combined
// gain; pole-free.  Same layout as channel_general.
CMat channel_fast(const geometry::ArrayGeometry& geom,
                  const std::vector<geometry::Pose>& poses, const PathSet& paths,
                  const CollapsedPathGains& gains,
                  PolarizationMode mode = PolarizationMode::Polarized);

// One sub-array block of user k's conjugated channel: entries
// sum_l conj(sigma_hat_l) * gain_l * exp(+j 2 pi / lambda t^T rho_l).
// channel_fast stores the conjugate of these values.
CVec channel_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                   const CVec& sigma_hat, double wavelength, PolarizationMode mode);

// Derivatives of the conjugated channel h_k^H with respect to the center of
// sub-array n.  3 x MN; rows are the x/y/z coordinates, columns outside block
// n are zero.
CMat3X channel_grad_center(const geometry::ArrayGeometry& geom,
                           const std::vector<geometry::Pose>& poses, const PathSet& paths,
                           const CollapsedPathGains& gains, int user, int subarray,
                           PolarizationMode mode = PolarizationMode::Polarized);

// Same for the Euler angles of sub-array n; rows are (alpha, beta, gamma).
CMat3X channel_grad_angles(const geometry::ArrayGeometry& geom,
                           const std::vector<geometry::Pose>& poses, const PathSet& paths,
                           const CollapsedPathGains& gains, int user, int subarray,
                           PolarizationMode mode = PolarizationMode::Polarized);

// Block versions (3 x M, only the moving sub-array) used by the pose search.
CMat3X grad_center_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                         const CVec& sigma_hat, double wavelength, PolarizationMode mode);
CMat3X grad_angles_block(const Mat3X& offsets, const geometry::Pose& pose, const UserPaths& up,
                         const CVec& sigma_hat, double wavelength, PolarizationMode mode);

// Vertical receive polarization (the increasing-theta unit vector) per path.
Mat3X vertical_rx_polarization(const VecX& theta, const VecX& phi);

}  // namespace sixdma::channel
