// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "sixdma/types.hpp"

namespace sixdma::geometry {

// Orientation of one sub-array, radians.  The rotation applied to local
// coordinates is R = Rz(gamma) * Ry(beta) * Rx(alpha).
struct EulerAngles {
  double alpha = 0.0;  // about x
  double beta = 0.0;   // about y
  double gamma = 0.0;  // about z
};

enum class EulerAxis { Alpha, Beta, Gamma };

// Center position [m] plus orientation of one sub-array.
struct Pose {
  Vec3 center = Vec3::Zero();
  EulerAngles angles;
};

// Axis-aligned box, both ends inclusive.  A zero-width axis pins the
// coordinate exactly.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Movable-array description: identical element layout per sub-array (offsets
// in the local frame) plus the feasible region for each pose.
struct ArrayGeometry {
  int n_subarrays = 0;            // N
  int antennas_per_subarray = 0;  // M
  Mat3X offsets;                  // 3 x M, local element coordinates [m]
  std::vector<Box> move_regions;  // one box per sub-array center
  std::array<AxisRange, 3> rot_range{};  // feasible (alpha, beta, gamma)

  int total_antennas() const { return n_subarrays * antennas_per_subarray; }
};

// Local-to-global rotation, product Rz(gamma) * Ry(beta) * Rx(alpha).
Mat3 rotation_matrix(const EulerAngles& a);

// Derivative of rotation_matrix with respect to one Euler angle: the matching
// factor of the product is replaced by its elementwise derivative.
Mat3 rotation_matrix_derivative(const EulerAngles& a, EulerAxis axis);

// Global element positions.  Column n*M + m holds R_n * offsets.col(m) +
// poses[n].center, so each sub-array occupies one contiguous block.
Mat3X antenna_positions(const ArrayGeometry& geom, const std::vector<Pose>& poses);

// Center inside its box and all three angles inside the rotatable range,
// bounds inclusive.  Never clamps.
bool pose_feasible(const ArrayGeometry& geom, const Pose& pose, int subarray);

// Rectangular grid in the local x-y plane, centered on the origin.  Column
// r*cols + c is element (r, c).
Mat3X upa_offsets(int rows, int cols, double spacing);

// Spacing diagnostics: warns when elements within a sub-array sit closer than
// half a wavelength, or when two move regions allow inter-sub-array antenna
// distances below half a wavelength.  Validation only; nothing is rejected.
std::vector<std::string> validate_geometry(const ArrayGeometry& geom, double wavelength);

}  // namespace sixdma::geometry
