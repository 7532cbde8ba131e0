// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sixdma/scenario.hpp"

using namespace sixdma;
using namespace sixdma::scenario;

namespace {

bool same_paths(const channel::PathSet& a, const channel::PathSet& b) {
  if (a.wavelength != b.wavelength || a.n_users() != b.n_users()) return false;
  for (int k = 0; k < a.n_users(); ++k) {
    const auto& ua = a.users[k];
    const auto& ub = b.users[k];
    if ((ua.theta - ub.theta).cwiseAbs().maxCoeff() != 0.0) return false;
    if ((ua.phi - ub.phi).cwiseAbs().maxCoeff() != 0.0) return false;
    if ((ua.prm - ub.prm).cwiseAbs().maxCoeff() != 0.0) return false;
    if ((ua.rx_pol - ub.rx_pol).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("decibel conversions hit the reference points") {
  CHECK(dbm_to_watts(10.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(dbm_to_watts(-80.0) == doctest::Approx(1e-11).epsilon(1e-14));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(db_to_power(-40.0) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(db_to_amplitude(-40.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(db_to_amplitude(-40.0) ==
        doctest::Approx(std::sqrt(db_to_power(-40.0))).epsilon(1e-14));
}

TEST_CASE("elevation transform hits its anchor points") {
  CHECK(elevation_from_uniform(0.5) == 0.0);
  CHECK(elevation_from_uniform(1.0) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(elevation_from_uniform(0.0) == doctest::Approx(-kPi / 2).epsilon(1e-14));
}

TEST_CASE("path angles have uniform sine elevation and uniform azimuth") {
  Rng rng(91);
  const int n = 100000;
  std::vector<double> sines, azimuths;
  sines.reserve(n);
  azimuths.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto [theta, phi] = sample_path_angles(rng);
    sines.push_back(std::sin(theta));
    azimuths.push_back(phi);
    CHECK(phi >= 0.0);
    CHECK(phi <= kPi);
  }
  CHECK(oracles::ks_uniform(sines, -1.0, 1.0) < 0.01);
  CHECK(oracles::ks_uniform(azimuths, 0.0, kPi) < 0.01);
}

TEST_CASE("equal seeds reproduce the scenario bit for bit") {
  SimConfig cfg;
  Rng a(999), b(999);
  CHECK(same_paths(build_scenario(cfg, a), build_scenario(cfg, b)));
}

TEST_CASE("geometric knobs do not touch the user draws") {
  SimConfig cfg;
  SimConfig wide = cfg;
  wide.movable_span_lambda = 7.0;
  wide.rot_half_range_deg = 5.0;
  Rng a(1001), b(1001);
  CHECK(same_paths(build_scenario(cfg, a), build_scenario(wide, b)));
}

TEST_CASE("path gains carry the configured average power") {
  SimConfig cfg;
  cfg.num_users = 10000;
  cfg.dist_min_m = 50.0;
  cfg.dist_max_m = 50.0;  // freeze the distance so the target is deterministic
  Rng rng(92);
  const channel::PathSet set = build_scenario(cfg, rng);
  const double amp = db_to_amplitude(cfg.pathloss_ref_db) *
                     std::pow(50.0, -cfg.pathloss_exponent);
  double mean = 0.0;
  for (const auto& up : set.users) mean += up.prm.diagonal().squaredNorm();
  mean /= cfg.num_users;
  CHECK(mean == doctest::Approx(amp * amp).epsilon(0.05));
}

TEST_CASE("gains sit on the diagonal of the response matrix") {
  SimConfig cfg;
  Rng rng(93);
  const channel::PathSet set = build_scenario(cfg, rng);
  for (const auto& up : set.users) {
    CHECK(up.prm.rows() == cfg.paths_per_user);
    CHECK(up.prm.cols() == cfg.paths_per_user);
    const CMat off = up.prm - CMat(up.prm.diagonal().asDiagonal());
    CHECK(off.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("a single path gives a scalar response") {
  SimConfig cfg;
  cfg.paths_per_user = 1;
  Rng rng(94);
  const channel::PathSet set = build_scenario(cfg, rng);
  const auto gains = channel::collapse_gains(set);
  for (int k = 0; k < cfg.num_users; ++k) {
    CHECK(set.users[k].prm.size() == 1);
    CHECK(std::abs(gains.sigma_hat[k](0) - std::sqrt(1.5) * set.users[k].prm(0, 0)) < 1e-15);
  }
}

TEST_CASE("vertical polarization is the increasing-elevation unit vector") {
  SimConfig cfg;  // vertical by default
  Rng rng(95);
  const channel::PathSet set = build_scenario(cfg, rng);
  for (const auto& up : set.users)
    for (int l = 0; l < up.n_tx_paths(); ++l) {
      const Vec3 e_th = channel::spherical_basis(up.theta(l), up.phi(l)).first;
      CHECK((up.rx_pol.col(l) - e_th).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("random tangent polarization is transverse, unit and actually random") {
  SimConfig cfg;
  cfg.rx_polarization = RxPolarization::RandomTangent;
  Rng rng(96);
  const channel::PathSet set = build_scenario(cfg, rng);
  int vertical_hits = 0;
  for (const auto& up : set.users)
    for (int l = 0; l < up.n_tx_paths(); ++l) {
      CHECK(std::abs(up.rx_pol.col(l).norm() - 1.0) < 1e-12);
      CHECK(std::abs(up.rx_pol.col(l).dot(up.rho.col(l))) < 1e-12);
      const Vec3 e_th = channel::spherical_basis(up.theta(l), up.phi(l)).first;
      if ((up.rx_pol.col(l) - e_th).norm() < 1e-6) ++vertical_hits;
    }
  CHECK(vertical_hits < cfg.num_users * cfg.paths_per_user);
}

TEST_CASE("default regions tile the x axis with a pinned y coordinate") {
  SimConfig cfg;
  const auto geom = default_geometry(cfg);
  const double lambda = cfg.wavelength();
  CHECK(geom.n_subarrays == 4);
  CHECK(geom.antennas_per_subarray == 4);
  for (const auto& box : geom.move_regions) {
    CHECK(box.lo.y() == 0.0);
    CHECK(box.hi.y() == 0.0);
    CHECK(box.hi.x() - box.lo.x() ==
          doctest::Approx(cfg.movable_span_lambda * lambda).epsilon(1e-12));
    CHECK(box.hi.z() - box.lo.z() ==
          doctest::Approx(cfg.movable_span_lambda * lambda).epsilon(1e-12));
  }
  const double zeta = cfg.rot_half_range_deg * kPi / 180.0;
  for (const auto& r : geom.rot_range) {
    CHECK(r.lo == doctest::Approx(-zeta).epsilon(1e-14));
    CHECK(r.hi == doctest::Approx(zeta).epsilon(1e-14));
  }
}

TEST_CASE("default regions never let sub-arrays come within half a wavelength") {
  for (double span : {0.0, 0.5, 2.0, 4.0}) {
    SimConfig cfg;
    cfg.movable_span_lambda = span;
    const auto geom = default_geometry(cfg);
    CHECK(validate_geometry(geom, cfg.wavelength()).empty());
    const auto poses = center_poses(geom);
    for (int n = 0; n < geom.n_subarrays; ++n)
      CHECK(geometry::pose_feasible(geom, poses[n], n));
  }
}

TEST_CASE("a single sub-array is centered at the origin") {
  SimConfig cfg;
  cfg.num_subarrays = 1;
  const auto geom = default_geometry(cfg);
  const Vec3 mid = 0.5 * (geom.move_regions[0].lo + geom.move_regions[0].hi);
  CHECK(mid.norm() == 0.0);
}

TEST_CASE("a span hint freezes the region centers across span sweeps") {
  SimConfig small;
  small.movable_span_lambda = 0.5;
  SimConfig large;
  large.movable_span_lambda = 4.0;
  const auto hinted = default_geometry(small, 4.0);
  const auto full = default_geometry(large);
  for (int n = 0; n < hinted.n_subarrays; ++n) {
    const Vec3 ch = 0.5 * (hinted.move_regions[n].lo + hinted.move_regions[n].hi);
    const Vec3 cf = 0.5 * (full.move_regions[n].lo + full.move_regions[n].hi);
    CHECK((ch - cf).norm() < 1e-12);
    // Nesting: the hinted small box sits inside the large one.
    CHECK((hinted.move_regions[n].lo.array() >= full.move_regions[n].lo.array() - 1e-15).all());
    CHECK((hinted.move_regions[n].hi.array() <= full.move_regions[n].hi.array() + 1e-15).all());
  }
}

TEST_CASE("center poses sit at the box midpoints with zero rotation") {
  SimConfig cfg;
  const auto geom = default_geometry(cfg);
  const auto poses = center_poses(geom);
  for (int n = 0; n < geom.n_subarrays; ++n) {
    CHECK((poses[n].center - 0.5 * (geom.move_regions[n].lo + geom.move_regions[n].hi))
              .norm() == 0.0);
    CHECK(poses[n].angles.alpha == 0.0);
    CHECK(poses[n].angles.beta == 0.0);
    CHECK(poses[n].angles.gamma == 0.0);
  }
}

TEST_CASE("solver options mirror the configuration") {
  SimConfig cfg;
  cfg.power_dbm = 17.0;
  cfg.noise_dbm = -75.0;
  cfg.epsilon = 2.5e-4;
  cfg.max_outer_iters = 123;
  const fp::SolveOptions opts = make_solve_options(cfg);
  CHECK(opts.power == dbm_to_watts(17.0));
  CHECK(opts.noise.size() == cfg.num_users);
  CHECK(opts.noise(0) == dbm_to_watts(-75.0));
  CHECK(opts.epsilon == 2.5e-4);
  CHECK(opts.max_outer_iters == 123);
}

TEST_CASE("config parsing covers every key") {
  std::istringstream in(
      "carrier_ghz = 28\n"
      "num_subarrays = 3\n"
      "upa_rows = 1\n"
      "upa_cols = 8   # comment after the value\n"
      "num_users = 2\n"
      "paths_per_user = 4\n"
      "power_dbm = 5\n"
      "noise_dbm = -70\n"
      "; full-line comment\n"
      "pathloss_ref_db = -35\n"
      "pathloss_exponent = 3.1\n"
      "dist_min_m = 10\n"
      "dist_max_m = 40\n"
      "\n"
      "movable_span_lambda = 1.5\n"
      "rot_half_range_deg = 30\n"
      "epsilon = 1e-4\n"
      "max_outer_iters = 50\n"
      "rx_polarization = random-tangent\n");
  const SimConfig cfg = parse_config(in);
  CHECK(cfg.carrier_ghz == 28.0);
  CHECK(cfg.num_subarrays == 3);
  CHECK(cfg.upa_rows == 1);
  CHECK(cfg.upa_cols == 8);
  CHECK(cfg.num_users == 2);
  CHECK(cfg.paths_per_user == 4);
  CHECK(cfg.power_dbm == 5.0);
  CHECK(cfg.noise_dbm == -70.0);
  CHECK(cfg.pathloss_ref_db == -35.0);
  CHECK(cfg.pathloss_exponent == 3.1);
  CHECK(cfg.dist_min_m == 10.0);
  CHECK(cfg.dist_max_m == 40.0);
  CHECK(cfg.movable_span_lambda == 1.5);
  CHECK(cfg.rot_half_range_deg == 30.0);
  CHECK(cfg.epsilon == 1e-4);
  CHECK(cfg.max_outer_iters == 50);
  CHECK(cfg.rx_polarization == RxPolarization::RandomTangent);
}

TEST_CASE("unparsed keys keep the base configuration") {
  SimConfig base;
  base.num_users = 7;
  std::istringstream in("power_dbm = 3\n");
  const SimConfig cfg = parse_config(in, base);
  CHECK(cfg.num_users == 7);
  CHECK(cfg.power_dbm == 3.0);
}

TEST_CASE("config errors name the offending key") {
  auto message_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message_of("mystery_knob = 1\n").find("mystery_knob") != std::string::npos);
  CHECK(message_of("num_users = banana\n").find("num_users") != std::string::npos);
  CHECK(message_of("power_dbm 10\n").find("power_dbm 10") != std::string::npos);
  CHECK(message_of("num_users = 0\n").find("num_users") != std::string::npos);
  CHECK(message_of("dist_max_m = 5\ndist_min_m = 9\n").find("dist_max_m") !=
        std::string::npos);
}

TEST_CASE("loading a missing config file raises a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/path/sixdma.conf"), ConfigError);
}
