// SPDX-License-Identifier: Apache-2.0
#include "sixdma/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sixdma::scenario {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

double elevation_from_uniform(double u) {
  return std::asin(std::clamp(2.0 * u - 1.0, -1.0, 1.0));
}

std::pair<double, double> sample_path_angles(Rng& rng) {
  double theta = elevation_from_uniform(rng.uniform());
  double phi = rng.uniform(0.0, kPi);
  return {theta, phi};
}

namespace {

void validate(const SimConfig& cfg) {
  auto demand = [](bool ok, const char* field) {
    if (!ok) throw ConfigError(std::string("config field out of range: ") + field);
  };
  demand(cfg.carrier_ghz > 0.0, "carrier_ghz");
  demand(cfg.num_subarrays >= 1, "num_subarrays");
  demand(cfg.upa_rows >= 1, "upa_rows");
  demand(cfg.upa_cols >= 1, "upa_cols");
  demand(cfg.num_users >= 1, "num_users");
  demand(cfg.paths_per_user >= 1, "paths_per_user");
  demand(cfg.dist_min_m > 0.0, "dist_min_m");
  demand(cfg.dist_max_m >= cfg.dist_min_m, "dist_max_m");
  demand(cfg.movable_span_lambda >= 0.0, "movable_span_lambda");
  demand(cfg.rot_half_range_deg >= 0.0 && cfg.rot_half_range_deg <= 180.0,
         "rot_half_range_deg");
  demand(cfg.epsilon > 0.0, "epsilon");
  demand(cfg.max_outer_iters >= 1, "max_outer_iters");
}

}  // namespace

geometry::ArrayGeometry default_geometry(const SimConfig& cfg, double span_hint_lambda) {
  validate(cfg);
  const double lambda = cfg.wavelength();
  const double side = cfg.movable_span_lambda * lambda;
  const double placement_side = std::max(cfg.movable_span_lambda, span_hint_lambda) * lambda;

  geometry::ArrayGeometry geom;
  geom.n_subarrays = cfg.num_subarrays;
  geom.antennas_per_subarray = cfg.antennas_per_subarray();
  geom.offsets = geometry::upa_offsets(cfg.upa_rows, cfg.upa_cols, lambda / 2.0);

  double r_max = 0.0;
  for (int i = 0; i < geom.antennas_per_subarray; ++i)
    r_max = std::max(r_max, geom.offsets.col(i).norm());

  // Edge-to-edge clearance keeps any feasible element pair of different
  // sub-arrays at least half a wavelength apart.
  const double pitch = placement_side + lambda / 2.0 + 2.0 * r_max;
  geom.move_regions.resize(cfg.num_subarrays);
  for (int n = 0; n < cfg.num_subarrays; ++n) {
    const double cx = (n - (cfg.num_subarrays - 1) / 2.0) * pitch;
    geom.move_regions[n].lo = Vec3(cx - side / 2.0, 0.0, -side / 2.0);
    geom.move_regions[n].hi = Vec3(cx + side / 2.0, 0.0, side / 2.0);
  }

  const double zeta = cfg.rot_half_range_deg * kPi / 180.0;
  for (auto& r : geom.rot_range) r = geometry::AxisRange{-zeta, zeta};
  return geom;
}

std::vector<geometry::Pose> center_poses(const geometry::ArrayGeometry& geom) {
  std::vector<geometry::Pose> poses(geom.n_subarrays);
  for (int n = 0; n < geom.n_subarrays; ++n)
    poses[n].center = 0.5 * (geom.move_regions[n].lo + geom.move_regions[n].hi);
  return poses;
}

channel::PathSet build_scenario(const SimConfig& cfg, Rng& rng) {
  validate(cfg);
  const int paths = cfg.paths_per_user;
  channel::PathSet set;
  set.wavelength = cfg.wavelength();
  set.users.reserve(cfg.num_users);

  for (int k = 0; k < cfg.num_users; ++k) {
    const double dist = rng.uniform(cfg.dist_min_m, cfg.dist_max_m);
    VecX theta(paths), phi(paths);
    for (int l = 0; l < paths; ++l) {
      auto [th, ph] = sample_path_angles(rng);
      theta(l) = th;
      phi(l) = ph;
    }
    const double amp = db_to_amplitude(cfg.pathloss_ref_db) *
                       std::pow(dist, -cfg.pathloss_exponent);
    const double path_var = amp * amp / paths;
    CMat prm = CMat::Zero(paths, paths);
    for (int l = 0; l < paths; ++l)
      prm(l, l) = rng.complex_normal(std::sqrt(path_var));

    Mat3X rx_pol(3, paths);
    if (cfg.rx_polarization == RxPolarization::Vertical) {
      rx_pol = channel::vertical_rx_polarization(theta, phi);
    } else {
      for (int l = 0; l < paths; ++l) {
        auto [e_th, e_ph] = channel::spherical_basis(theta(l), phi(l));
        const double psi = rng.uniform(0.0, 2.0 * kPi);
        rx_pol.col(l) = std::cos(psi) * e_th + std::sin(psi) * e_ph;
      }
    }
    set.users.push_back(channel::make_user_paths(theta, phi, prm, rx_pol));
  }
  return set;
}

fp::SolveOptions make_solve_options(const SimConfig& cfg) {
  validate(cfg);
  fp::SolveOptions opts;
  opts.power = dbm_to_watts(cfg.power_dbm);
  opts.noise = VecX::Constant(cfg.num_users, dbm_to_watts(cfg.noise_dbm));
  opts.epsilon = cfg.epsilon;
  opts.max_outer_iters = cfg.max_outer_iters;
  return opts;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& text) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad value for '" + key + "': " + text);
  }
  if (used != text.size()) throw ConfigError("bad value for '" + key + "': " + text);
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad value for '" + key + "': " + text);
  }
  if (used != text.size()) throw ConfigError("bad value for '" + key + "': " + text);
  return v;
}

RxPolarization to_polarization(const std::string& key, const std::string& text) {
  if (text == "vertical") return RxPolarization::Vertical;
  if (text == "random-tangent") return RxPolarization::RandomTangent;
  throw ConfigError("bad value for '" + key + "': " + text);
}

}  // namespace

SimConfig parse_config(std::istream& in, const SimConfig& base) {
  SimConfig cfg = base;
  std::string line;
  while (std::getline(in, line)) {
    const size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "carrier_ghz") cfg.carrier_ghz = to_double(key, value);
    else if (key == "num_subarrays") cfg.num_subarrays = to_int(key, value);
    else if (key == "upa_rows") cfg.upa_rows = to_int(key, value);
    else if (key == "upa_cols") cfg.upa_cols = to_int(key, value);
    else if (key == "num_users") cfg.num_users = to_int(key, value);
    else if (key == "paths_per_user") cfg.paths_per_user = to_int(key, value);
    else if (key == "power_dbm") cfg.power_dbm = to_double(key, value);
    else if (key == "noise_dbm") cfg.noise_dbm = to_double(key, value);
    else if (key == "pathloss_ref_db") cfg.pathloss_ref_db = to_double(key, value);
    else if (key == "pathloss_exponent") cfg.pathloss_exponent = to_double(key, value);
    else if (key == "dist_min_m") cfg.dist_min_m = to_double(key, value);
    else if (key == "dist_max_m") cfg.dist_max_m = to_double(key, value);
    else if (key == "movable_span_lambda") cfg.movable_span_lambda = to_double(key, value);
    else if (key == "rot_half_range_deg") cfg.rot_half_range_deg = to_double(key, value);
    else if (key == "epsilon") cfg.epsilon = to_double(key, value);
    else if (key == "max_outer_iters") cfg.max_outer_iters = to_int(key, value);
    else if (key == "rx_polarization") cfg.rx_polarization = to_polarization(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

SimConfig load_config(const std::string& path, const SimConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, base);
}

}  // namespace sixdma::scenario
