// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sixdma/channel.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/manifold.hpp"
#include "sixdma/types.hpp"

namespace sixdma::fp {

// Fractional-programming auxiliaries: u holds the per-user SINR surrogate,
// v the complex normalized signal term.
struct FpState {
  VecX u;
  CVec v;
};

// Hybrid beamformer.  Sub-connected: effective() = blkdiag(b_bar) * w_digital
// with w_digital of size N x K.  Fully digital: w_digital is MN x K and is
// the effective matrix itself.  A dense analog matrix (fully connected
// baseline) overrides both.
struct Beamformers {
  CMat w_digital;
  CVec b_bar;
  bool fully_digital = false;
  std::optional<CMat> w_analog_dense;  // MN x N_RF when present
  int antennas_per_chain = 1;          // M, used by the block-diagonal map

  CMat effective() const;
};

// blkdiag(b_bar) * w_digital; b_bar has N*M entries, w_digital N columns map.
CMat apply_abf(const CVec& b_bar, const CMat& w_digital);

// W_A^H * columns: compresses MN-vectors through the block-diagonal analog
// stage, N x K result.
CMat compress_abf(const CVec& b_bar, const CMat& h, int antennas_per_chain);

double sum_rate(const CMat& h, const Beamformers& bf, const VecX& noise);

// Closed-form refresh of both auxiliaries at the current configuration.
FpState update_uv(const CMat& h, const Beamformers& bf, const VecX& noise);

// Full surrogate value (natural log), constant terms included.
double fp_objective(const CMat& h, const Beamformers& bf, const FpState& state,
                    const VecX& noise);

// Digital stage update: w_k = (Psi + lambda I)^{-1} omega_k with the smallest
// lambda >= 0 that satisfies ||W_D||_F^2 <= budget.  psi is W_A^H H.  The
// multiplier is reported through lambda_out when given.
CMat dbf_update(const CMat& psi, const FpState& state, double budget,
                double* lambda_out = nullptr);

struct SubproblemTimings {
  double uv = 0.0, dbf = 0.0, abf = 0.0, pose = 0.0;  // seconds
};

struct IterRecord {
  double sum_rate = 0.0;
  double fp_obj = 0.0;
};

struct RunReport {
  double initial_sum_rate = 0.0;  // at the starting configuration
  std::vector<IterRecord> trace;  // one record per outer iteration
  std::vector<geometry::Pose> final_poses;
  Beamformers final_bf;
  std::string termination;  // "converged" | "max_iters" | "fitted"
  SubproblemTimings timings;

  // Present when the optimization model differs from the reporting channel
  // (e.g. the mismatched-polarization baseline evaluated on the true channel).
  std::optional<double> evaluated_sum_rate;

  int iterations() const { return static_cast<int>(trace.size()); }
  double final_sum_rate() const { return trace.back().sum_rate; }
  double reported_sum_rate() const {
    return evaluated_sum_rate ? *evaluated_sum_rate : final_sum_rate();
  }
};

struct PoseStepOptions {
  double kappa_position = 10.0;
  double kappa_angle = 10.0;
  int max_halvings = 30;
};

struct SolveOptions {
  double power = 0.01;  // transmit budget [W]
  VecX noise;           // per-user noise power [W]
  double epsilon = 1e-3;
  int max_outer_iters = 200;
  manifold::RcgOptions mo;
  PoseStepOptions pose_step;
  bool optimize_abf = true;
  bool optimize_position = true;
  bool optimize_orientation = true;
  bool fully_digital = false;
  channel::PolarizationMode mode = channel::PolarizationMode::Polarized;
};

struct WarmStart {
  std::vector<geometry::Pose> poses;
  std::optional<Beamformers> bf;
};

// Alternating optimization: per outer iteration refresh (u, v) once, update
// the digital stage in closed form, descend the analog phases from the
// previous point, then walk each sub-array pose (position first, orientation
// second).  Stops when the sum-rate change drops below epsilon.
RunReport ao_solve(const geometry::ArrayGeometry& geom, const channel::PathSet& paths,
                   const SolveOptions& opts, const std::vector<geometry::Pose>& init_poses,
                   const std::optional<WarmStart>& warm = {});

}  // namespace sixdma::fp
