// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "sixdma/fp_ao.hpp"
#include "sixdma/rng.hpp"

using namespace sixdma;
using namespace sixdma::fp;

namespace {

// Block-diagonal analog matrix assembled explicitly, MN x N.
CMat blkdiag(const CVec& b_bar, int m) {
  const int n = static_cast<int>(b_bar.size()) / m;
  CMat out = CMat::Zero(n * m, n);
  for (int c = 0; c < n; ++c) out.col(c).segment(c * m, m) = b_bar.segment(c * m, m);
  return out;
}

// Per-user SINR accumulated scalar by scalar.
double sum_rate_by_hand(const CMat& h, const CMat& w_eff, const VecX& noise) {
  double rate = 0.0;
  for (int k = 0; k < h.cols(); ++k) {
    double interference = noise(k);
    for (int j = 0; j < w_eff.cols(); ++j)
      if (j != k) interference += std::norm((h.col(k).adjoint() * w_eff.col(j))(0));
    rate += std::log2(1.0 + std::norm((h.col(k).adjoint() * w_eff.col(k))(0)) / interference);
  }
  return rate;
}

}  // namespace

TEST_CASE("analog map equals the explicit block-diagonal product") {
  Rng rng(51);
  const int n = 3, m = 4, k = 2;
  CVec b_bar(n * m);
  for (int i = 0; i < n * m; ++i) b_bar(i) = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  const CMat w = oracles::random_cmat(rng, n, k);
  const CMat direct = apply_abf(b_bar, w);
  CHECK((direct - blkdiag(b_bar, m) * w).cwiseAbs().maxCoeff() < 1e-14);

  // All-ones phases with an identity digital stage yield block indicators.
  const CMat eye = apply_abf(CVec::Ones(n * m), CMat::Identity(n, n));
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n * m; ++r)
      CHECK(eye(r, c) == (r / m == c ? cplx(1, 0) : cplx(0, 0)));
}

TEST_CASE("channel compression equals the adjoint block-diagonal product") {
  Rng rng(52);
  const int n = 3, m = 2, k = 4;
  CVec b_bar(n * m);
  for (int i = 0; i < n * m; ++i) b_bar(i) = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  const CMat h = oracles::random_cmat(rng, n * m, k);
  const CMat got = compress_abf(b_bar, h, m);
  CHECK((got - blkdiag(b_bar, m).adjoint() * h).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("effective beamformer covers all three architectures") {
  Rng rng(53);
  const int n = 2, m = 3, k = 2;

  Beamformers sub = oracles::random_beamformers(rng, n, m, k);
  CHECK((sub.effective() - apply_abf(sub.b_bar, sub.w_digital)).cwiseAbs().maxCoeff() <
        1e-14);

  Beamformers fd = oracles::random_beamformers(rng, n, m, k, 1.0, true);
  CHECK((fd.effective() - fd.w_digital).cwiseAbs().maxCoeff() == 0.0);

  Beamformers dense = oracles::random_beamformers(rng, n, m, k);
  dense.w_analog_dense = oracles::random_cmat(rng, n * m, n);
  dense.w_digital = oracles::random_cmat(rng, n, k);
  CHECK((dense.effective() - *dense.w_analog_dense * dense.w_digital).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("sum rate counts one bit per user without interference") {
  const int k = 2;
  CMat h = CMat::Identity(k, k);
  Beamformers bf;
  bf.fully_digital = true;
  bf.antennas_per_chain = 1;
  const VecX noise = VecX::Constant(k, 0.25);
  bf.w_digital = 0.5 * CMat::Identity(k, k);  // |s_kk|^2 = noise, s_kj = 0
  CHECK(sum_rate(h, bf, noise) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero beamformer carries zero rate") {
  Rng rng(54);
  const CMat h = oracles::random_cmat(rng, 6, 3);
  Beamformers bf;
  bf.fully_digital = true;
  bf.w_digital = CMat::Zero(6, 3);
  CHECK(sum_rate(h, bf, VecX::Constant(3, 1.0)) == 0.0);
}

TEST_CASE("sum rate agrees with a scalar-by-scalar accumulation") {
  Rng rng(55);
  for (int t = 0; t < 50; ++t) {
    const CMat h = oracles::random_cmat(rng, 8, 2);
    const Beamformers bf = oracles::random_beamformers(rng, 4, 2, 2);
    const VecX noise = VecX::Constant(2, 0.7);
    CHECK(sum_rate(h, bf, noise) ==
          doctest::Approx(sum_rate_by_hand(h, bf.effective(), noise)).epsilon(1e-12));
  }
}

TEST_CASE("auxiliary refresh reduces to snr and wiener scalars for one user") {
  Rng rng(56);
  const CMat h = oracles::random_cmat(rng, 4, 1);
  const Beamformers bf = oracles::random_beamformers(rng, 2, 2, 1);
  const VecX noise = VecX::Constant(1, 0.9);
  const cplx s = (h.col(0).adjoint() * bf.effective().col(0))(0);
  const FpState st = update_uv(h, bf, noise);
  CHECK(st.u(0) == doctest::Approx(std::norm(s) / 0.9).epsilon(1e-12));
  CHECK(std::abs(st.v(0) - s / (0.9 + std::norm(s))) < 1e-12);
}

TEST_CASE("auxiliary refresh returns zeros for a silent transmitter") {
  Rng rng(57);
  const CMat h = oracles::random_cmat(rng, 4, 2);
  Beamformers bf;
  bf.fully_digital = true;
  bf.w_digital = CMat::Zero(4, 2);
  const FpState st = update_uv(h, bf, VecX::Constant(2, 1.0));
  CHECK(st.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("surrogate is tight after the auxiliary refresh") {
  Rng rng(58);
  for (int t = 0; t < 100; ++t) {
    const CMat h = oracles::random_cmat(rng, 6, 3);
    const Beamformers bf = oracles::random_beamformers(rng, 3, 2, 3);
    const VecX noise = VecX::Constant(3, 1.0);
    const FpState st = update_uv(h, bf, noise);
    const double obj = fp_objective(h, bf, st, noise);
    double expect = 0.0, rate = 0.0;
    for (int k = 0; k < 3; ++k) {
      expect += std::log1p(st.u(k));
      rate += std::log2(1.0 + st.u(k));
    }
    CHECK(std::abs(obj - expect) < 1e-10);
    CHECK(sum_rate(h, bf, noise) == doctest::Approx(rate).epsilon(1e-12));
  }
}

TEST_CASE("surrogate matches its definition for arbitrary auxiliaries") {
  Rng rng(59);
  for (int t = 0; t < 50; ++t) {
    const CMat h = oracles::random_cmat(rng, 4, 2);
    const Beamformers bf = oracles::random_beamformers(rng, 2, 2, 2);
    const VecX noise = VecX::Constant(2, 0.8);
    const FpState st = oracles::random_state(rng, 2);
    const CMat s = h.adjoint() * bf.effective();
    double expect = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double total = noise(k) + s.row(k).squaredNorm();
      expect += (1.0 + st.u(k)) * (2.0 * std::real(std::conj(st.v(k)) * s(k, k)) -
                                   std::norm(st.v(k)) * total);
      expect += std::log1p(st.u(k)) - st.u(k);
    }
    CHECK(fp_objective(h, bf, st, noise) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("surrogate without signal terms is nonpositive") {
  Rng rng(60);
  const CMat h = oracles::random_cmat(rng, 4, 2);
  const Beamformers bf = oracles::random_beamformers(rng, 2, 2, 2);
  FpState st = oracles::random_state(rng, 2);
  st.v.setZero();
  CHECK(fp_objective(h, bf, st, VecX::Constant(2, 1.0)) <= 0.0);
}

TEST_CASE("scalar digital update solves the ridge system exactly") {
  const CMat psi = CMat::Constant(1, 1, cplx(0.8, 0.2));
  FpState st;
  st.u = VecX::Constant(1, 1.5);
  st.v = CVec::Constant(1, cplx(0.7, -0.3));
  double lambda = -1.0;
  const CMat w = dbf_update(psi, st, 100.0, &lambda);
  const double quad = 2.5 * std::norm(st.v(0)) * std::norm(psi(0, 0));
  const cplx target = 2.5 * st.v(0) * psi(0, 0);
  CHECK(lambda == 0.0);
  CHECK(std::abs(w(0, 0) - target / quad) < 1e-12);
}

TEST_CASE("digital update satisfies complementary slackness") {
  Rng rng(61);
  for (int t = 0; t < 50; ++t) {
    const CMat psi = oracles::random_cmat(rng, 4, 4);
    const FpState st = oracles::random_state(rng, 4);
    const double budget = 0.05;
    double lambda = -1.0;
    const CMat w = dbf_update(psi, st, budget, &lambda);
    CHECK(lambda >= 0.0);
    CHECK(w.squaredNorm() <= budget + 1e-9);
    CHECK(std::abs(lambda * (w.squaredNorm() - budget)) < 1e-6);
  }
}

TEST_CASE("digital update norm grows and multiplier shrinks with the budget") {
  Rng rng(62);
  const CMat psi = oracles::random_cmat(rng, 3, 3);
  const FpState st = oracles::random_state(rng, 3);
  double prev_norm = -1.0, prev_lambda = 1e100;
  for (double budget : {0.01, 0.1, 1.0, 10.0, 1000.0}) {
    double lambda = -1.0;
    const CMat w = dbf_update(psi, st, budget, &lambda);
    CHECK(w.norm() >= prev_norm - 1e-9);
    CHECK(lambda <= prev_lambda + 1e-12);
    prev_norm = w.norm();
    prev_lambda = lambda;
  }
}

TEST_CASE("closed-form digital update beats projected gradient ascent") {
  Rng rng(63);
  for (int t = 0; t < 10; ++t) {
    const CMat psi = oracles::random_cmat(rng, 4, 3);
    const FpState st = oracles::random_state(rng, 3);
    const double budget = 0.2;
    const CMat w = dbf_update(psi, st, budget);
    const CMat w_pg = oracles::dbf_projected_gradient(psi, st, budget);
    CHECK(oracles::dbf_objective(psi, st, w) >=
          oracles::dbf_objective(psi, st, w_pg) - 1e-6);
  }
}

TEST_CASE("a huge tolerance stops the solver after one sweep") {
  Rng rng(64);
  const auto inst = oracles::random_instance(rng, 2, 2, 2, 2, 2);
  SolveOptions opts;
  opts.noise = VecX::Constant(2, 1e-3);
  opts.epsilon = 1e9;
  const RunReport rep = ao_solve(inst.geom, inst.paths, opts, inst.poses);
  CHECK(rep.iterations() == 1);
  CHECK(rep.termination == "converged");
}

TEST_CASE("alternating optimization never decreases the rate") {
  Rng rng(65);
  for (int t = 0; t < 8; ++t) {
    const auto inst = oracles::random_instance(rng, 2, 4, 2, 3, 2);
    SolveOptions opts;
    opts.noise = VecX::Constant(2, 1e-3);
    const RunReport rep = ao_solve(inst.geom, inst.paths, opts, inst.poses);
    REQUIRE(rep.iterations() >= 1);
    double prev = rep.initial_sum_rate;
    for (const auto& rec : rep.trace) {
      CHECK(rec.sum_rate >= prev - 1e-9);
      prev = rec.sum_rate;
    }
    CHECK((rep.termination == "converged" || rep.termination == "max_iters"));
  }
}

TEST_CASE("ablated solvers stay monotone as well") {
  Rng rng(66);
  const auto inst = oracles::random_instance(rng, 2, 4, 2, 3, 2);
  for (int mask = 0; mask < 4; ++mask) {
    SolveOptions opts;
    opts.noise = VecX::Constant(2, 1e-3);
    opts.optimize_position = mask & 1;
    opts.optimize_orientation = mask & 2;
    opts.optimize_abf = (mask == 0);
    const RunReport rep = ao_solve(inst.geom, inst.paths, opts, inst.poses);
    double prev = rep.initial_sum_rate;
    for (const auto& rec : rep.trace) {
      CHECK(rec.sum_rate >= prev - 1e-9);
      prev = rec.sum_rate;
    }
  }
}

TEST_CASE("fully digital solves respect the power budget") {
  Rng rng(67);
  const auto inst = oracles::random_instance(rng, 2, 4, 2, 3, 2);
  SolveOptions opts;
  opts.noise = VecX::Constant(2, 1e-3);
  opts.fully_digital = true;
  const RunReport rep = ao_solve(inst.geom, inst.paths, opts, inst.poses);
  CHECK(rep.final_bf.effective().squaredNorm() <= opts.power + 1e-9);
  double prev = rep.initial_sum_rate;
  for (const auto& rec : rep.trace) {
    CHECK(rec.sum_rate >= prev - 1e-9);
    prev = rec.sum_rate;
  }
}

TEST_CASE("sub-connected solves respect the power budget") {
  Rng rng(68);
  const auto inst = oracles::random_instance(rng, 2, 4, 2, 3, 2);
  SolveOptions opts;
  opts.noise = VecX::Constant(2, 1e-3);
  const RunReport rep = ao_solve(inst.geom, inst.paths, opts, inst.poses);
  CHECK(rep.final_bf.effective().squaredNorm() <= opts.power + 1e-9);
}

TEST_CASE("warm starts resume from the warm configuration") {
  Rng rng(69);
  const auto inst = oracles::random_instance(rng, 2, 4, 2, 3, 2);
  SolveOptions opts;
  opts.noise = VecX::Constant(2, 1e-3);
  const RunReport cold = ao_solve(inst.geom, inst.paths, opts, inst.poses);

  WarmStart warm;
  warm.poses = cold.final_poses;
  warm.bf = cold.final_bf;
  const RunReport hot = ao_solve(inst.geom, inst.paths, opts, inst.poses, warm);
  CHECK(hot.initial_sum_rate == doctest::Approx(cold.final_sum_rate()).epsilon(1e-12));
  CHECK(hot.final_sum_rate() >= cold.final_sum_rate() - 1e-9);
}

TEST_CASE("infeasible starting poses are rejected") {
  Rng rng(70);
  auto inst = oracles::random_instance(rng, 2, 2, 2, 2, 2);
  SolveOptions opts;
  opts.noise = VecX::Constant(2, 1e-3);
  auto bad = inst.poses;
  bad[0].center = inst.geom.move_regions[0].hi + Vec3::Constant(1.0);
  CHECK_THROWS_AS(ao_solve(inst.geom, inst.paths, opts, bad), std::invalid_argument);
}
