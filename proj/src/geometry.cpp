// SPDX-License-Identifier: Apache-2.0
#include "sixdma/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace sixdma::geometry {

namespace {

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 rot_y(double b) {
  Mat3 m;
  m << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  return m;
}

Mat3 rot_z(double g) {
  Mat3 m;
  m << std::cos(g), -std::sin(g), 0, std::sin(g), std::cos(g), 0, 0, 0, 1;
  return m;
}

Mat3 drot_x(double a) {
  Mat3 m;
  m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return m;
}

Mat3 drot_y(double b) {
  Mat3 m;
  m << -std::sin(b), 0, std::cos(b), 0, 0, 0, -std::cos(b), 0, -std::sin(b);
  return m;
}

Mat3 drot_z(double g) {
  Mat3 m;
  m << -std::sin(g), -std::cos(g), 0, std::cos(g), -std::sin(g), 0, 0, 0, 0;
  return m;
}

}  // namespace

Mat3 rotation_matrix(const EulerAngles& a) {
  return rot_z(a.gamma) * rot_y(a.beta) * rot_x(a.alpha);
}

Mat3 rotation_matrix_derivative(const EulerAngles& a, EulerAxis axis) {
  switch (axis) {
    case EulerAxis::Alpha:
      return rot_z(a.gamma) * rot_y(a.beta) * drot_x(a.alpha);
    case EulerAxis::Beta:
      return rot_z(a.gamma) * drot_y(a.beta) * rot_x(a.alpha);
    case EulerAxis::Gamma:
      return drot_z(a.gamma) * rot_y(a.beta) * rot_x(a.alpha);
  }
  throw std::invalid_argument("rotation_matrix_derivative: bad axis");
}

Mat3X antenna_positions(const ArrayGeometry& geom, const std::vector<Pose>& poses) {
  if (static_cast<int>(poses.size()) != geom.n_subarrays)
    throw std::invalid_argument("antenna_positions: pose count does not match sub-array count");
  const int m = geom.antennas_per_subarray;
  if (geom.offsets.cols() != m)
    throw std::invalid_argument("antenna_positions: offset count does not match antennas per sub-array");
  Mat3X out(3, geom.total_antennas());
  for (int n = 0; n < geom.n_subarrays; ++n) {
    const Mat3 rot = rotation_matrix(poses[n].angles);
    for (int i = 0; i < m; ++i)
      out.col(n * m + i) = rot * geom.offsets.col(i) + poses[n].center;
  }
  return out;
}

bool pose_feasible(const ArrayGeometry& geom, const Pose& pose, int subarray) {
  if (subarray < 0 || subarray >= geom.n_subarrays)
    throw std::invalid_argument("pose_feasible: sub-array index out of range");
  if (!geom.move_regions[subarray].contains(pose.center)) return false;
  return geom.rot_range[0].contains(pose.angles.alpha) &&
         geom.rot_range[1].contains(pose.angles.beta) &&
         geom.rot_range[2].contains(pose.angles.gamma);
}

Mat3X upa_offsets(int rows, int cols, double spacing) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("upa_offsets: need at least one element");
  Mat3X out(3, rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.col(r * cols + c) = Vec3((r - 0.5 * (rows - 1)) * spacing,
                                   (c - 0.5 * (cols - 1)) * spacing, 0.0);
    }
  }
  return out;
}

std::vector<std::string> validate_geometry(const ArrayGeometry& geom, double wavelength) {
  std::vector<std::string> warnings;
  const double min_sep = 0.5 * wavelength;
  const double tol = 1e-12;

  const int m = static_cast<int>(geom.offsets.cols());
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double d = (geom.offsets.col(i) - geom.offsets.col(j)).norm();
      if (d < min_sep - tol) {
        warnings.push_back("element spacing " + std::to_string(d) + " m between offsets " +
                           std::to_string(i) + " and " + std::to_string(j) +
                           " is below half a wavelength");
      }
    }
  }

  // Worst-case distance between antennas of two sub-arrays: box-to-box gap
  // minus both element radii.
  double radius = 0.0;
  for (int i = 0; i < m; ++i) radius = std::max(radius, geom.offsets.col(i).norm());
  for (int a = 0; a < geom.n_subarrays; ++a) {
    for (int b = a + 1; b < geom.n_subarrays; ++b) {
      Vec3 gap = Vec3::Zero();
      for (int ax = 0; ax < 3; ++ax) {
        double lo_a = geom.move_regions[a].lo[ax], hi_a = geom.move_regions[a].hi[ax];
        double lo_b = geom.move_regions[b].lo[ax], hi_b = geom.move_regions[b].hi[ax];
        gap[ax] = std::max({0.0, lo_b - hi_a, lo_a - hi_b});
      }
      double worst = gap.norm() - 2.0 * radius;
      if (worst < min_sep - tol) {
        warnings.push_back("move regions " + std::to_string(a) + " and " + std::to_string(b) +
                           " allow inter-sub-array antenna distance " + std::to_string(worst) +
                           " m, below half a wavelength");
      }
    }
  }
  return warnings;
}

}  // namespace sixdma::geometry
