// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sixdma/channel.hpp"
#include "sixdma/fp_ao.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/rng.hpp"
#include "sixdma/types.hpp"

namespace sixdma::scenario {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Receive-side polarization model: a vertically oriented dipole per path, or
// a uniformly random direction in the plane orthogonal to the propagation
// direction.
enum class RxPolarization { Vertical, RandomTangent };

// Simulation parameters.  Defaults describe the reference setup: a 30 GHz
// carrier, four movable 2x2 half-wavelength sub-arrays, four single-antenna
// users, six paths each, 10 dBm transmit power over -80 dBm noise.
struct SimConfig {
  double carrier_ghz = 30.0;
  int num_subarrays = 4;
  int upa_rows = 2;
  int upa_cols = 2;
  int num_users = 4;
  int paths_per_user = 6;

  double power_dbm = 10.0;
  double noise_dbm = -80.0;
  double pathloss_ref_db = -40.0;  // average power gain at 1 m
  double pathloss_exponent = 2.8;
  double dist_min_m = 20.0;
  double dist_max_m = 100.0;

  double movable_span_lambda = 2.0;   // box side of each movable region
  double rot_half_range_deg = 20.0;   // rotation limit, all three axes
  double epsilon = 1e-3;
  int max_outer_iters = 200;
  RxPolarization rx_polarization = RxPolarization::Vertical;

  double wavelength() const { return kSpeedOfLight / (carrier_ghz * 1e9); }
  int antennas_per_subarray() const { return upa_rows * upa_cols; }
};

double dbm_to_watts(double dbm);
double db_to_power(double db);
double db_to_amplitude(double db);

// Elevation with uniform sin(theta): theta = asin(2u - 1) for u in [0, 1].
double elevation_from_uniform(double u);

// One (theta, phi) draw: sin-uniform elevation, azimuth uniform on [0, pi].
std::pair<double, double> sample_path_angles(Rng& rng);

// Movable regions tiled along the x axis, one box per sub-array, each a
// square of side movable_span_lambda in the x-z plane (y pinned to 0).
// Adjacent boxes are separated so that no feasible pair of poses can bring
// elements of different sub-arrays closer than half a wavelength.  Passing
// span_hint_lambda >= movable_span_lambda places the box centers where a
// span_hint-sized layout would put them, so sweeps over the span keep every
// smaller feasible set nested inside the larger ones.
geometry::ArrayGeometry default_geometry(const SimConfig& cfg, double span_hint_lambda = 0.0);

// Every sub-array at its region center with zero rotation.
std::vector<geometry::Pose> center_poses(const geometry::ArrayGeometry& geom);

// Draws users and paths.  Per user, in order: distance ~ U[dist_min, dist_max];
// per path the angle pair; per path the complex gain CN(0, g(d)^2 / L), with
// g(d) the linear amplitude gain at distance d, into the diagonal of the path
// response matrix; then the receive polarization when it is random.  The order
// is part of the reproducibility contract; draws never depend on the array
// geometry, so sweeps over geometric parameters see identical users.
channel::PathSet build_scenario(const SimConfig& cfg, Rng& rng);

fp::SolveOptions make_solve_options(const SimConfig& cfg);

// "key = value" per line, '#' or ';' comments, keys named after SimConfig
// fields.  Unknown keys and unparsable values raise ConfigError naming the
// key.  Values not given keep the defaults of `base`.
SimConfig parse_config(std::istream& in, const SimConfig& base = {});
SimConfig load_config(const std::string& path, const SimConfig& base = {});

}  // namespace sixdma::scenario
