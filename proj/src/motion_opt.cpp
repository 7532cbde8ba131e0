// SPDX-License-Identifier: Apache-2.0
#include "sixdma/motion_opt.hpp"

#include <cmath>

namespace sixdma::motion {

namespace {

// Surrogate terms that depend on the coupling matrix S(k, k') = h_k^H a_k'.
double objective_from_coupling(const CMat& s, const fp::FpState& state) {
  const int k_users = static_cast<int>(s.rows());
  double value = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const double w = 1.0 + state.u(k);
    const double mu = w * std::norm(state.v(k));
    value += 2.0 * w * std::real(std::conj(state.v(k)) * s(k, k));
    value -= mu * s.row(k).squaredNorm();
  }
  return value;
}

// Everything the per-sub-array search touches.  The coupling split S = S_rest
// + (block contribution) lets a candidate pose be scored from K short block
// channels instead of a full channel rebuild.
struct BlockSearch {
  const geometry::ArrayGeometry& geom;
  const channel::PathSet& paths;
  const channel::CollapsedPathGains& gains;
  const fp::FpState& state;
  channel::PolarizationMode mode;
  int subarray;

  CMat a_block;  // M x K, effective beamformer rows of this sub-array
  CMat s;        // K x K coupling at the current pose
  CMat s_rest;   // coupling with this sub-array's contribution removed

  BlockSearch(const geometry::ArrayGeometry& g, const std::vector<geometry::Pose>& poses,
              const channel::PathSet& p, const channel::CollapsedPathGains& cg,
              const fp::FpState& st, const fp::Beamformers& bf, int n,
              channel::PolarizationMode pm)
      : geom(g), paths(p), gains(cg), state(st), mode(pm), subarray(n) {
    const int m = geom.antennas_per_subarray;
    const CMat a = bf.effective();
    const CMat h = channel::channel_fast(geom, poses, paths, gains, mode);
    a_block = a.middleRows(static_cast<Eigen::Index>(n) * m, m);
    s = h.adjoint() * a;
    s_rest = s;
    for (int k = 0; k < paths.n_users(); ++k) {
      const CVec cb = h.col(k).segment(static_cast<Eigen::Index>(n) * m, m).conjugate();
      s_rest.row(k) -= cb.transpose() * a_block;
    }
  }

  // Coupling with this sub-array moved to `pose`; rows rebuilt from the
  // conjugated block channels.
  CMat coupling_at(const geometry::Pose& pose) const {
    CMat out = s_rest;
    for (int k = 0; k < paths.n_users(); ++k) {
      const CVec cb = channel::channel_block(geom.offsets, pose, paths.users[k],
                                             gains.sigma_hat[k], paths.wavelength, mode);
      out.row(k) += cb.transpose() * a_block;
    }
    return out;
  }

  // Residual r_k = (1+u_k) conj(v_k) a_k - mu_k sum_k' a_k' conj(S(k,k')),
  // restricted to this sub-array's rows.  The objective derivative along any
  // pose coordinate x is sum_k 2 Re{ (d conj(h_k)/dx)^T r_k }.
  CVec residual(const CMat& coupling, int k) const {
    const double w = 1.0 + state.u(k);
    const double mu = w * std::norm(state.v(k));
    CVec r = w * std::conj(state.v(k)) * a_block.col(k);
    r -= mu * (a_block * coupling.row(k).adjoint());
    return r;
  }

  Vec3 center_gradient(const geometry::Pose& pose, const CMat& coupling) const {
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < paths.n_users(); ++k) {
      const CMat3X d = channel::grad_center_block(geom.offsets, pose, paths.users[k],
                                                  gains.sigma_hat[k], paths.wavelength, mode);
      g += 2.0 * (d * residual(coupling, k)).real();
    }
    return g;
  }

  Vec3 angle_gradient(const geometry::Pose& pose, const CMat& coupling) const {
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < paths.n_users(); ++k) {
      const CMat3X d = channel::grad_angles_block(geom.offsets, pose, paths.users[k],
                                                  gains.sigma_hat[k], paths.wavelength, mode);
      g += 2.0 * (d * residual(coupling, k)).real();
    }
    return g;
  }
};

// Axes the feasible set pins to a single value (zero-width box side, zero
// rotation range) carry no search freedom; their gradient components are
// dropped so the step stays inside the feasible plane.
Vec3 mask_degenerate(const Vec3& g, const geometry::Box& box) {
  Vec3 out = g;
  for (int i = 0; i < 3; ++i)
    if (box.lo(i) == box.hi(i)) out(i) = 0.0;
  return out;
}

Vec3 mask_degenerate(const Vec3& g, const std::array<geometry::AxisRange, 3>& range) {
  Vec3 out = g;
  for (int i = 0; i < 3; ++i)
    if (range[i].lo == range[i].hi) out(i) = 0.0;
  return out;
}

}  // namespace

double pose_objective(const CMat& h, const fp::Beamformers& bf, const fp::FpState& state) {
  return objective_from_coupling(CMat(h.adjoint() * bf.effective()), state);
}

std::pair<Vec3, Vec3> pose_gradients(const geometry::ArrayGeometry& geom,
                                     const std::vector<geometry::Pose>& poses,
                                     const channel::PathSet& paths,
                                     const channel::CollapsedPathGains& gains,
                                     const fp::FpState& state, const fp::Beamformers& bf,
                                     int subarray, channel::PolarizationMode mode) {
  BlockSearch search(geom, poses, paths, gains, state, bf, subarray, mode);
  const geometry::Pose& pose = poses[subarray];
  return {search.center_gradient(pose, search.s), search.angle_gradient(pose, search.s)};
}

geometry::Pose update_subarray_pose(const geometry::ArrayGeometry& geom,
                                    const std::vector<geometry::Pose>& poses,
                                    const channel::PathSet& paths,
                                    const channel::CollapsedPathGains& gains,
                                    const fp::FpState& state, const fp::Beamformers& bf,
                                    int subarray, const fp::PoseStepOptions& step,
                                    PoseUpdateToggles toggles,
                                    channel::PolarizationMode mode) {
  BlockSearch search(geom, poses, paths, gains, state, bf, subarray, mode);
  geometry::Pose pose = poses[subarray];
  CMat coupling = search.s;
  double best = objective_from_coupling(coupling, state);

  if (toggles.position) {
    const Vec3 grad =
        mask_degenerate(search.center_gradient(pose, coupling), geom.move_regions[subarray]);
    double kappa = step.kappa_position;
    for (int halving = 0; halving <= step.max_halvings; ++halving, kappa *= 0.5) {
      geometry::Pose cand = pose;
      cand.center += kappa * grad;
      if (!geometry::pose_feasible(geom, cand, subarray)) continue;
      const CMat s_cand = search.coupling_at(cand);
      const double value = objective_from_coupling(s_cand, state);
      if (value >= best) {
        pose = cand;
        coupling = s_cand;
        best = value;
        break;
      }
    }
  }

  if (toggles.orientation) {
    const Vec3 grad = mask_degenerate(search.angle_gradient(pose, coupling), geom.rot_range);
    double kappa = step.kappa_angle;
    for (int halving = 0; halving <= step.max_halvings; ++halving, kappa *= 0.5) {
      geometry::Pose cand = pose;
      cand.angles.alpha += kappa * grad(0);
      cand.angles.beta += kappa * grad(1);
      cand.angles.gamma += kappa * grad(2);
      if (!geometry::pose_feasible(geom, cand, subarray)) continue;
      const CMat s_cand = search.coupling_at(cand);
      const double value = objective_from_coupling(s_cand, state);
      if (value >= best) {
        pose = cand;
        best = value;
        break;
      }
    }
  }

  return pose;
}

}  // namespace sixdma::motion
