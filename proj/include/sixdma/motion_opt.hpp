// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "sixdma/channel.hpp"
#include "sixdma/fp_ao.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/types.hpp"

namespace sixdma::motion {

// Pose-dependent part of the surrogate:
//   sum_k ( -h_k^H PsiHat_k h_k + 2 Re{h_k^H omegaHat_k} )
// with PsiHat_k = mu_k sum_k' a_k' a_k'^H, omegaHat_k = (1+u_k) conj(v_k) a_k
// and a_k the effective beamformer columns.
double pose_objective(const CMat& h, const fp::Beamformers& bf, const fp::FpState& state);

// Gradients of pose_objective for one sub-array at the current configuration:
// (d/d center, d/d angles), each a real 3-vector.
std::pair<Vec3, Vec3> pose_gradients(const geometry::ArrayGeometry& geom,
                                     const std::vector<geometry::Pose>& poses,
                                     const channel::PathSet& paths,
                                     const channel::CollapsedPathGains& gains,
                                     const fp::FpState& state, const fp::Beamformers& bf,
                                     int subarray,
                                     channel::PolarizationMode mode =
                                         channel::PolarizationMode::Polarized);

struct PoseUpdateToggles {
  bool position = true;
  bool orientation = true;
};

// Gradient-ascent step for one sub-array: candidate = current + kappa *
// gradient, accepted only when feasible and not decreasing the objective,
// with kappa halved on each rejection.  Gradient components along zero-width
// axes (box side or angle range collapsed to a point) are dropped so a
// degenerate axis never blocks the others.  Position moves first; the
// orientation gradient is then re-evaluated at the updated position.  Returns
// the (possibly unchanged) pose.
geometry::Pose update_subarray_pose(const geometry::ArrayGeometry& geom,
                                    const std::vector<geometry::Pose>& poses,
                                    const channel::PathSet& paths,
                                    const channel::CollapsedPathGains& gains,
                                    const fp::FpState& state, const fp::Beamformers& bf,
                                    int subarray, const fp::PoseStepOptions& step,
                                    PoseUpdateToggles toggles,
                                    channel::PolarizationMode mode =
                                        channel::PolarizationMode::Polarized);

}  // namespace sixdma::motion
