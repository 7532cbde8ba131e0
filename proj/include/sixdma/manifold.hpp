// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sixdma/types.hpp"

namespace sixdma::manifold {

// Raised when a retraction would normalize a zero entry.
struct RetractionDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point on the product of unit circles: every entry has modulus one.
using CirclePoint = CVec;

bool unit_modulus(const CirclePoint& b, double tol = 1e-12);

// Quadratic-minus-linear objective over the analog phase vector:
//   L(b) = sum_k mu_k * sum_k' |hbar_{k,k'}^H b|^2 - 2 Re{omega_bar_k^H b}.
// Stored per user so the terms remain inspectable; finalize() assembles the
// summed quadratic and linear parts used by the hot path.
struct AbfQuadratic {
  VecX mu;                  // K nonneg weights
  std::vector<CMat> hbar;   // per user: MN x K, column k' = hbar_{k,k'}
  CMat omega_bar;           // MN x K, column k = omega_bar_k

  CMat quad;  // sum_k mu_k * hbar_k hbar_k^H
  CVec lin;   // sum_k omega_bar_k

  void finalize();
  int dim() const { return static_cast<int>(lin.size()); }
  int n_users() const { return static_cast<int>(mu.size()); }
};

double abf_objective(const AbfQuadratic& q, const CirclePoint& b);

// Wirtinger gradient with respect to conj(b):
//   sum_k (mu_k sum_k' hbar hbar^H b - omega_bar_k).
CVec euclidean_grad(const AbfQuadratic& q, const CirclePoint& b);

// Remove the radial component at each entry: z - Re{z .* conj(b)} .* b.
CVec project_tangent(const CirclePoint& b, const CVec& z);

// Entrywise renormalization of b + step * dir.  Throws RetractionDegenerate
// if an entry lands on zero.
CirclePoint retract(const CirclePoint& b, double step, const CVec& dir);

struct RcgOptions {
  double tol = 1e-8;        // stop when |L(i+1) - L(i)| < tol
  int max_iters = 100;
  double init_step = 1.0;   // Armijo search start
  double shrink = 0.5;      // Armijo contraction
  double c1 = 1e-4;         // sufficient-decrease constant
  int max_backtracks = 60;
};

struct RcgTrace {
  std::vector<double> objective;  // value per iterate, including the start
  double initial_grad_norm = 0.0;
  double final_grad_norm = 0.0;
  double max_modulus_err = 0.0;   // worst | |b_i| - 1 | over all iterates
  std::string termination;        // "tol", "max_iters" or "stalled"
};

// Conjugate-gradient descent on the circle manifold with a nonnegative
// Polak-Ribiere coefficient, projection transport, Armijo backtracking and a
// steepest-descent reset every dim(b) iterations or on a non-descent
// direction.
std::pair<CirclePoint, RcgTrace> rcg_minimize(const AbfQuadratic& q, CirclePoint b0,
                                              const RcgOptions& opts = {});

}  // namespace sixdma::manifold
