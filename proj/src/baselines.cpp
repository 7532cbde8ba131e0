// SPDX-License-Identifier: Apache-2.0
#include "sixdma/baselines.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace sixdma::baselines {

namespace {

struct NameEntry {
  SchemeId id;
  const char* name;
};

constexpr NameEntry kNames[] = {
    {SchemeId::SubConn6dma, "subconn-6dma"},
    {SchemeId::FdFa, "fd-fa"},
    {SchemeId::FdMaPosition, "fd-ma-position"},
    {SchemeId::FdMaOrientation, "fd-ma-orientation"},
    {SchemeId::FcFa, "fc-fa"},
    {SchemeId::SubConnFa, "subconn-fa"},
    {SchemeId::Unpolarized6dma, "unpolarized-6dma"},
    {SchemeId::SubConnMaPosition, "subconn-ma-position"},
    {SchemeId::SubConnMaOrientation, "subconn-ma-orientation"},
};

CMat unit_phases(const CMat& z) {
  CMat out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const cplx v = z(i, j);
      out(i, j) = (std::abs(v) < 1e-300) ? cplx(1.0, 0.0) : v / std::abs(v);
    }
  return out;
}

}  // namespace

std::string scheme_name(SchemeId id) {
  for (const auto& e : kNames)
    if (e.id == id) return e.name;
  throw std::invalid_argument("unknown scheme id");
}

SchemeId scheme_from_name(const std::string& name) {
  for (const auto& e : kNames)
    if (name == e.name) return e.id;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

fp::SolveOptions scheme_options(SchemeId id, const fp::SolveOptions& base) {
  fp::SolveOptions o = base;
  o.fully_digital = false;
  o.optimize_abf = true;
  o.mode = channel::PolarizationMode::Polarized;
  switch (id) {
    case SchemeId::SubConn6dma:
      o.optimize_position = o.optimize_orientation = true;
      break;
    case SchemeId::SubConnFa:
      o.optimize_position = o.optimize_orientation = false;
      break;
    case SchemeId::SubConnMaPosition:
      o.optimize_position = true;
      o.optimize_orientation = false;
      break;
    case SchemeId::SubConnMaOrientation:
      o.optimize_position = false;
      o.optimize_orientation = true;
      break;
    case SchemeId::Unpolarized6dma:
      o.optimize_position = o.optimize_orientation = true;
      o.mode = channel::PolarizationMode::Unpolarized;
      break;
    case SchemeId::FdFa:
    case SchemeId::FcFa:
      o.fully_digital = true;
      o.optimize_abf = false;
      o.optimize_position = o.optimize_orientation = false;
      break;
    case SchemeId::FdMaPosition:
      o.fully_digital = true;
      o.optimize_abf = false;
      o.optimize_position = true;
      o.optimize_orientation = false;
      break;
    case SchemeId::FdMaOrientation:
      o.fully_digital = true;
      o.optimize_abf = false;
      o.optimize_position = false;
      o.optimize_orientation = true;
      break;
  }
  return o;
}

std::pair<CMat, CMat> fc_fit(const CMat& w_fd, int n_rf, int iters) {
  const Eigen::Index mn = w_fd.rows();
  const Eigen::Index k_users = w_fd.cols();
  if (n_rf < 1 || k_users < 1 || iters < 1)
    throw std::invalid_argument("fc_fit: bad dimensions");

  // With at least one chain per antenna a Fourier phase basis spans the whole
  // space, so the least-squares digital factor is already exact.
  if (n_rf >= mn) {
    CMat w_a(mn, n_rf);
    for (int r = 0; r < n_rf; ++r)
      for (Eigen::Index i = 0; i < mn; ++i)
        w_a(i, r) = std::polar(1.0, 2.0 * kPi * static_cast<double>(i) * r / n_rf);
    return {w_a, w_a.colPivHouseholderQr().solve(w_fd)};
  }

  // Start from the phases of cyclically reused digital columns; repeated
  // groups get a per-row phase ramp so the start has full column rank.
  CMat w_a(mn, n_rf);
  for (int r = 0; r < n_rf; ++r) {
    const Eigen::Index src = r % k_users;
    const double group = static_cast<double>(r / k_users);
    for (Eigen::Index i = 0; i < mn; ++i) {
      const double ph = std::arg(w_fd(i, src)) +
                        2.0 * kPi * group * static_cast<double>(i) / static_cast<double>(mn);
      w_a(i, r) = std::polar(1.0, ph);
    }
  }

  CMat w_d;
  for (int it = 0; it < iters; ++it) {
    w_d = w_a.colPivHouseholderQr().solve(w_fd);
    w_a = unit_phases(w_fd * w_d.adjoint());
  }
  w_d = w_a.colPivHouseholderQr().solve(w_fd);
  return {w_a, w_d};
}

fp::RunReport run_scheme(SchemeId id, const geometry::ArrayGeometry& geom,
                         const channel::PathSet& paths, const fp::SolveOptions& base,
                         const std::vector<geometry::Pose>& init_poses,
                         const std::optional<fp::WarmStart>& warm) {
  const fp::SolveOptions opts = scheme_options(id, base);
  fp::RunReport report = fp::ao_solve(geom, paths, opts, init_poses, warm);

  if (id == SchemeId::FcFa) {
    auto [w_a, w_d] = fc_fit(report.final_bf.w_digital, geom.n_subarrays);
    const double used = (w_a * w_d).squaredNorm();
    if (used > opts.power) w_d *= std::sqrt(opts.power / used);
    fp::Beamformers hybrid;
    hybrid.w_digital = std::move(w_d);
    hybrid.w_analog_dense = std::move(w_a);
    hybrid.antennas_per_chain = geom.antennas_per_subarray;
    const CMat h = channel::channel_fast(geom, report.final_poses, paths,
                                         channel::collapse_gains(paths));
    report.evaluated_sum_rate = fp::sum_rate(h, hybrid, opts.noise);
    report.final_bf = std::move(hybrid);
    report.termination = "fitted";
  } else if (id == SchemeId::Unpolarized6dma) {
    const CMat h = channel::channel_fast(geom, report.final_poses, paths,
                                         channel::collapse_gains(paths));
    report.evaluated_sum_rate = fp::sum_rate(h, report.final_bf, opts.noise);
  }
  return report;
}

namespace {

// Warm-start sources under the nested policy, in tie-break order; also the
// dependency closure.
std::vector<SchemeId> nested_sources(SchemeId id) {
  switch (id) {
    case SchemeId::SubConn6dma:
      return {SchemeId::SubConnMaPosition, SchemeId::SubConnMaOrientation,
              SchemeId::Unpolarized6dma, SchemeId::SubConnFa};
    case SchemeId::SubConnMaPosition:
    case SchemeId::SubConnMaOrientation:
    case SchemeId::Unpolarized6dma:
      return {SchemeId::SubConnFa};
    case SchemeId::FdMaPosition:
    case SchemeId::FdMaOrientation:
    case SchemeId::FcFa:
      return {SchemeId::FdFa};
    default:
      return {};
  }
}

bool warm_usable(const fp::WarmStart& w, const geometry::ArrayGeometry& geom,
                 const fp::SolveOptions& opts, int n_users) {
  if (static_cast<int>(w.poses.size()) != geom.n_subarrays) return false;
  for (int n = 0; n < geom.n_subarrays; ++n)
    if (!geometry::pose_feasible(geom, w.poses[n], n)) return false;
  if (!w.bf) return true;
  if (w.bf->w_analog_dense) return false;
  if (w.bf->fully_digital != opts.fully_digital) return false;
  if (w.bf->w_digital.cols() != n_users) return false;
  const Eigen::Index mn = geom.total_antennas();
  if (opts.fully_digital) return w.bf->w_digital.rows() == mn;
  return w.bf->b_bar.size() == mn && w.bf->w_digital.rows() == geom.n_subarrays;
}

// Objective at a candidate starting point under the scheme's own channel
// model; the budget is re-imposed so sweep warm starts stay feasible.
double warm_rate(fp::WarmStart& w, const geometry::ArrayGeometry& geom,
                 const channel::PathSet& paths, const channel::CollapsedPathGains& gains,
                 const fp::SolveOptions& opts) {
  const double budget =
      opts.fully_digital ? opts.power : opts.power / geom.antennas_per_subarray;
  const double used = w.bf->w_digital.squaredNorm();
  if (used > budget) w.bf->w_digital *= std::sqrt(budget / used);
  const CMat h = channel::channel_fast(geom, w.poses, paths, gains, opts.mode);
  return fp::sum_rate(h, *w.bf, opts.noise);
}

}  // namespace

TrialOutput run_trial(const geometry::ArrayGeometry& geom, const channel::PathSet& paths,
                      const fp::SolveOptions& base,
                      const std::vector<geometry::Pose>& init_poses,
                      const std::vector<SchemeId>& schemes, bool nested,
                      const std::map<SchemeId, fp::WarmStart>& axis_warm) {
  std::set<SchemeId> want(schemes.begin(), schemes.end());
  if (want.empty())
    want.insert(kAllSchemes.begin(), kAllSchemes.end());
  if (nested) {
    for (bool grew = true; grew;) {
      grew = false;
      for (SchemeId id : std::set<SchemeId>(want))
        for (SchemeId dep : nested_sources(id)) grew |= want.insert(dep).second;
    }
  }

  // Restricted schemes first so their solutions exist when a freer scheme
  // asks for them.
  constexpr std::array<SchemeId, 9> kOrder = {
      SchemeId::SubConnFa,        SchemeId::SubConnMaPosition,
      SchemeId::SubConnMaOrientation, SchemeId::Unpolarized6dma,
      SchemeId::SubConn6dma,      SchemeId::FdFa,
      SchemeId::FdMaPosition,     SchemeId::FdMaOrientation,
      SchemeId::FcFa,
  };

  const auto gains = channel::collapse_gains(paths);
  TrialOutput out;
  for (SchemeId id : kOrder) {
    if (!want.count(id)) continue;
    const fp::SolveOptions opts = scheme_options(id, base);

    std::vector<fp::WarmStart> candidates;
    if (nested) {
      for (SchemeId src : nested_sources(id)) {
        auto it = out.reports.find(src);
        if (it == out.reports.end()) continue;
        candidates.push_back({it->second.final_poses, it->second.final_bf});
      }
    }
    if (id != SchemeId::FcFa) {
      auto it = axis_warm.find(id);
      if (it != axis_warm.end()) candidates.push_back(it->second);
    }

    std::optional<fp::WarmStart> warm;
    double best = -1.0;
    for (auto& cand : candidates) {
      if (!cand.bf || !warm_usable(cand, geom, opts, paths.n_users())) continue;
      const double rate = warm_rate(cand, geom, paths, gains, opts);
      if (rate > best) {
        best = rate;
        warm = cand;
      }
    }

    const auto t0 = std::chrono::steady_clock::now();
    out.reports[id] = run_scheme(id, geom, paths, base, init_poses, warm);
    out.wall_seconds[id] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

}  // namespace sixdma::baselines
