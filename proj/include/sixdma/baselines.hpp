// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sixdma/channel.hpp"
#include "sixdma/fp_ao.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/types.hpp"

namespace sixdma::baselines {

// The proposed scheme plus the comparison configurations.  "fd" = one RF
// chain per antenna, "fc" = fully connected analog stage fitted to the
// fully digital solution, "subconn" = block-diagonal analog stage, "ma" =
// one movement freedom enabled, "fa" = fixed arrays.
enum class SchemeId {
  SubConn6dma,
  FdFa,
  FdMaPosition,
  FdMaOrientation,
  FcFa,
  SubConnFa,
  Unpolarized6dma,
  SubConnMaPosition,
  SubConnMaOrientation,
};

inline constexpr std::array<SchemeId, 9> kAllSchemes = {
    SchemeId::SubConn6dma,       SchemeId::FdFa,
    SchemeId::FdMaPosition,      SchemeId::FdMaOrientation,
    SchemeId::FcFa,              SchemeId::SubConnFa,
    SchemeId::Unpolarized6dma,   SchemeId::SubConnMaPosition,
    SchemeId::SubConnMaOrientation,
};

std::string scheme_name(SchemeId id);
SchemeId scheme_from_name(const std::string& name);  // throws std::invalid_argument

// Capability toggles for one scheme applied on top of shared solve options.
fp::SolveOptions scheme_options(SchemeId id, const fp::SolveOptions& base);

// Alternating fit of w_fd (MN x K) into a dense unit-modulus analog factor
// (MN x n_rf) times a digital factor (n_rf x K): least-squares digital step,
// elementwise phase projection for the analog step.  With n_rf = MN the fit
// is exact up to roundoff.
std::pair<CMat, CMat> fc_fit(const CMat& w_fd, int n_rf, int iters = 20);

// One scheme end to end.  The fully connected baseline solves the fully
// digital problem first and fits the hybrid factors afterwards; the
// unpolarized baseline optimizes under its mismatched channel and is then
// evaluated on the true one (reported through evaluated_sum_rate).
fp::RunReport run_scheme(SchemeId id, const geometry::ArrayGeometry& geom,
                         const channel::PathSet& paths, const fp::SolveOptions& base,
                         const std::vector<geometry::Pose>& init_poses,
                         const std::optional<fp::WarmStart>& warm = {});

struct TrialOutput {
  std::map<SchemeId, fp::RunReport> reports;
  std::map<SchemeId, double> wall_seconds;
};

// All requested schemes on one scenario.  With nested starts every freer
// scheme warm-starts from a restricted one (ma variants from fa, the
// proposed scheme from its best restricted candidate, fd variants from fd-fa)
// so the dominance ordering holds per trial, not just in the mean; schemes a
// requested scheme depends on are run as needed and included in the output.
// axis_warm supplies an extra warm-start candidate per scheme (the same
// scheme's solution at the previous point of a sweep); the better starting
// point wins, judged by the starting objective under the scheme's own model.
TrialOutput run_trial(const geometry::ArrayGeometry& geom, const channel::PathSet& paths,
                      const fp::SolveOptions& base,
                      const std::vector<geometry::Pose>& init_poses,
                      const std::vector<SchemeId>& schemes, bool nested = true,
                      const std::map<SchemeId, fp::WarmStart>& axis_warm = {});

}  // namespace sixdma::baselines
