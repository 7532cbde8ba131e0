// SPDX-License-Identifier: Apache-2.0
#include "sixdma/fp_ao.hpp"

#include <chrono>
#include <cmath>

#include "sixdma/motion_opt.hpp"

namespace sixdma::fp {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// K x K coupling matrix, entry (k, k') = h_k^H a_k'.
CMat coupling(const CMat& h, const CMat& effective) { return h.adjoint() * effective; }

}  // namespace

CMat Beamformers::effective() const {
  if (w_analog_dense) return (*w_analog_dense) * w_digital;
  if (fully_digital) return w_digital;
  return apply_abf(b_bar, w_digital);
}

CMat apply_abf(const CVec& b_bar, const CMat& w_digital) {
  const int n = static_cast<int>(w_digital.rows());
  if (n == 0 || b_bar.size() % n != 0)
    throw std::invalid_argument("apply_abf: phase vector not divisible into chains");
  const int m = static_cast<int>(b_bar.size()) / n;
  CMat out(b_bar.size(), w_digital.cols());
  for (int c = 0; c < n; ++c)
    out.middleRows(c * m, m) = b_bar.segment(c * m, m) * w_digital.row(c);
  return out;
}

CMat compress_abf(const CVec& b_bar, const CMat& h, int antennas_per_chain) {
  if (antennas_per_chain < 1 || b_bar.size() % antennas_per_chain != 0 ||
      h.rows() != b_bar.size())
    throw std::invalid_argument("compress_abf: dimension mismatch");
  const int n = static_cast<int>(b_bar.size()) / antennas_per_chain;
  CMat out(n, h.cols());
  for (int c = 0; c < n; ++c)
    out.row(c) = b_bar.segment(c * antennas_per_chain, antennas_per_chain).adjoint() *
                 h.middleRows(c * antennas_per_chain, antennas_per_chain);
  return out;
}

double sum_rate(const CMat& h, const Beamformers& bf, const VecX& noise) {
  if (noise.size() != h.cols()) throw std::invalid_argument("sum_rate: noise size mismatch");
  const CMat s = coupling(h, bf.effective());
  const int k_users = static_cast<int>(h.cols());
  double rate = 0.0;
  for (int k = 0; k < k_users; ++k) {
    double desired = std::norm(s(k, k));
    double interference = 0.0;
    for (int j = 0; j < k_users; ++j)
      if (j != k) interference += std::norm(s(k, j));
    rate += std::log2(1.0 + desired / (interference + noise(k)));
  }
  return rate;
}

FpState update_uv(const CMat& h, const Beamformers& bf, const VecX& noise) {
  if (noise.size() != h.cols()) throw std::invalid_argument("update_uv: noise size mismatch");
  const CMat s = coupling(h, bf.effective());
  const int k_users = static_cast<int>(h.cols());
  FpState st;
  st.u.resize(k_users);
  st.v.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    double desired = std::norm(s(k, k));
    double total = noise(k);
    for (int j = 0; j < k_users; ++j) total += std::norm(s(k, j));
    st.u(k) = desired / (total - desired);  // SINR, denominator keeps the noise
    st.v(k) = s(k, k) / total;
  }
  return st;
}

double fp_objective(const CMat& h, const Beamformers& bf, const FpState& state,
                    const VecX& noise) {
  const CMat s = coupling(h, bf.effective());
  const int k_users = static_cast<int>(h.cols());
  double value = 0.0;
  for (int k = 0; k < k_users; ++k) {
    double nu = noise(k);
    for (int j = 0; j < k_users; ++j) nu += std::norm(s(k, j));
    const cplx omega = s(k, k);
    double quad = 2.0 * std::real(std::conj(state.v(k)) * omega) - std::norm(state.v(k)) * nu;
    value += (1.0 + state.u(k)) * quad + std::log1p(state.u(k)) - state.u(k);
  }
  return value;
}

CMat dbf_update(const CMat& psi, const FpState& state, double budget,
                double* lambda_out) {
  const int n = static_cast<int>(psi.rows());
  const int k_users = static_cast<int>(psi.cols());
  if (state.u.size() != k_users || state.v.size() != k_users)
    throw std::invalid_argument("dbf_update: state size mismatch");
  if (budget < 0.0) throw std::invalid_argument("dbf_update: negative power budget");

  CMat omega(n, k_users);
  CMat quad = CMat::Zero(n, n);
  for (int k = 0; k < k_users; ++k) {
    double w = 1.0 + state.u(k);
    omega.col(k) = w * state.v(k) * psi.col(k);
    quad += w * std::norm(state.v(k)) * (psi.col(k) * psi.col(k).adjoint());
  }

  Eigen::SelfAdjointEigenSolver<CMat> es(quad);
  VecX evals = es.eigenvalues().cwiseMax(0.0);  // PSD up to roundoff
  const CMat omega_t = es.eigenvectors().adjoint() * omega;

  auto weights = [&](double lambda) {
    VecX d = (evals.array() + lambda).matrix();
    for (int i = 0; i < n; ++i) d(i) = std::max(d(i), 1e-12);  // pseudo-solve floor
    return d;
  };
  auto norm2_at = [&](double lambda) {
    const VecX d = weights(lambda);
    double acc = 0.0;
    for (int k = 0; k < k_users; ++k)
      for (int i = 0; i < n; ++i) acc += std::norm(omega_t(i, k)) / (d(i) * d(i));
    return acc;
  };
  auto solve_at = [&](double lambda) {
    const VecX d = weights(lambda);
    CMat w = omega_t;
    for (int i = 0; i < n; ++i) w.row(i) /= d(i);
    return CMat(es.eigenvectors() * w);
  };

  if (norm2_at(0.0) <= budget) {
    if (lambda_out) *lambda_out = 0.0;
    return solve_at(0.0);
  }

  // ||W_D(lambda)||_F^2 decreases monotonically; bisect to the budget.
  double hi = 1.0;
  for (int i = 0; i < 400 && norm2_at(hi) > budget; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 128; ++i) {
    double mid = 0.5 * (lo + hi);
    if (norm2_at(mid) > budget)
      lo = mid;
    else
      hi = mid;
  }
  if (lambda_out) *lambda_out = hi;
  return solve_at(hi);  // feasible side of the bracket
}

namespace {

Beamformers default_beamformers(const CMat& h, const SolveOptions& opts, int n_subarrays,
                                int antennas) {
  Beamformers bf;
  bf.fully_digital = opts.fully_digital;
  bf.antennas_per_chain = antennas;
  const double budget = opts.fully_digital ? opts.power : opts.power / antennas;
  if (opts.fully_digital) {
    bf.b_bar = CVec::Ones(h.rows());
    bf.w_digital = h;  // matched filter
  } else {
    bf.b_bar = CVec::Ones(static_cast<Eigen::Index>(n_subarrays) * antennas);
    bf.w_digital = compress_abf(bf.b_bar, h, antennas);
  }
  double norm = bf.w_digital.norm();
  if (norm > 0.0) bf.w_digital *= std::sqrt(budget) / norm;
  return bf;
}

}  // namespace

RunReport ao_solve(const geometry::ArrayGeometry& geom, const channel::PathSet& paths,
                   const SolveOptions& opts, const std::vector<geometry::Pose>& init_poses,
                   const std::optional<WarmStart>& warm) {
  using clock = std::chrono::steady_clock;
  if (opts.max_outer_iters < 1) throw std::invalid_argument("ao_solve: need at least one iteration");
  if (opts.noise.size() != paths.n_users())
    throw std::invalid_argument("ao_solve: noise entries must match user count");

  const int antennas = geom.antennas_per_subarray;
  const auto gains = channel::collapse_gains(paths);

  std::vector<geometry::Pose> poses = (warm && !warm->poses.empty()) ? warm->poses : init_poses;
  for (int n = 0; n < geom.n_subarrays; ++n)
    if (!geometry::pose_feasible(geom, poses[n], n))
      throw std::invalid_argument("ao_solve: infeasible starting pose");

  CMat h = channel::channel_fast(geom, poses, paths, gains, opts.mode);
  Beamformers bf = (warm && warm->bf) ? *warm->bf
                                      : default_beamformers(h, opts, geom.n_subarrays, antennas);
  const double budget = opts.fully_digital ? opts.power : opts.power / antennas;

  RunReport report;
  double rate_prev = sum_rate(h, bf, opts.noise);
  report.initial_sum_rate = rate_prev;

  for (int iter = 0; iter < opts.max_outer_iters; ++iter) {
    auto t0 = clock::now();
    const FpState state = update_uv(h, bf, opts.noise);
    report.timings.uv += seconds_since(t0);

    t0 = clock::now();
    const CMat psi = bf.fully_digital ? h : compress_abf(bf.b_bar, h, antennas);
    bf.w_digital = dbf_update(psi, state, budget);
    report.timings.dbf += seconds_since(t0);

    if (opts.optimize_abf && !bf.fully_digital) {
      t0 = clock::now();
      manifold::AbfQuadratic q;
      q.mu.resize(paths.n_users());
      q.omega_bar.resize(h.rows(), paths.n_users());
      q.hbar.resize(paths.n_users());
      for (int k = 0; k < paths.n_users(); ++k) {
        double w = 1.0 + state.u(k);
        q.mu(k) = w * std::norm(state.v(k));
        CMat hb(h.rows(), paths.n_users());
        for (int j = 0; j < paths.n_users(); ++j)
          for (int c = 0; c < geom.n_subarrays; ++c)
            hb.col(j).segment(c * antennas, antennas) =
                std::conj(bf.w_digital(c, j)) * h.col(k).segment(c * antennas, antennas);
        q.hbar[k] = std::move(hb);
        q.omega_bar.col(k) = w * state.v(k) * q.hbar[k].col(k);
      }
      q.finalize();
      auto [b_next, mo_trace] = manifold::rcg_minimize(q, bf.b_bar, opts.mo);
      bf.b_bar = std::move(b_next);
      report.timings.abf += seconds_since(t0);
    }

    if (opts.optimize_position || opts.optimize_orientation) {
      t0 = clock::now();
      motion::PoseUpdateToggles toggles{opts.optimize_position, opts.optimize_orientation};
      for (int n = 0; n < geom.n_subarrays; ++n)
        poses[n] = motion::update_subarray_pose(geom, poses, paths, gains, state, bf, n,
                                                opts.pose_step, toggles, opts.mode);
      h = channel::channel_fast(geom, poses, paths, gains, opts.mode);
      report.timings.pose += seconds_since(t0);
    }

    double rate = sum_rate(h, bf, opts.noise);
    report.trace.push_back({rate, fp_objective(h, bf, state, opts.noise)});
    if (std::abs(rate - rate_prev) < opts.epsilon) {
      report.termination = "converged";
      break;
    }
    rate_prev = rate;
  }
  if (report.termination.empty()) report.termination = "max_iters";

  report.final_poses = std::move(poses);
  report.final_bf = std::move(bf);
  return report;
}

}  // namespace sixdma::fp
