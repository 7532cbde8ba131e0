// SPDX-License-Identifier: Apache-2.0
#include "sixdma/manifold.hpp"

#include <cmath>

namespace sixdma::manifold {

bool unit_modulus(const CirclePoint& b, double tol) {
  for (int i = 0; i < b.size(); ++i)
    if (std::abs(std::abs(b(i)) - 1.0) > tol) return false;
  return true;
}

void AbfQuadratic::finalize() {
  const int mn = static_cast<int>(omega_bar.rows());
  quad = CMat::Zero(mn, mn);
  for (int k = 0; k < n_users(); ++k) quad += mu(k) * (hbar[k] * hbar[k].adjoint());
  lin = omega_bar.rowwise().sum();
}

double abf_objective(const AbfQuadratic& q, const CirclePoint& b) {
  if (b.size() != q.dim()) throw std::invalid_argument("abf_objective: dimension mismatch");
  const cplx quad_term = b.dot(q.quad * b);  // b^H Q b, real up to roundoff
  return quad_term.real() - 2.0 * std::real(q.lin.dot(b));
}

CVec euclidean_grad(const AbfQuadratic& q, const CirclePoint& b) {
  if (b.size() != q.dim()) throw std::invalid_argument("euclidean_grad: dimension mismatch");
  return q.quad * b - q.lin;
}

CVec project_tangent(const CirclePoint& b, const CVec& z) {
  CVec out(z.size());
  for (int i = 0; i < z.size(); ++i)
    out(i) = z(i) - std::real(z(i) * std::conj(b(i))) * b(i);
  return out;
}

CirclePoint retract(const CirclePoint& b, double step, const CVec& dir) {
  CirclePoint out = b + step * dir;
  for (int i = 0; i < out.size(); ++i) {
    double mod = std::abs(out(i));
    if (mod < 1e-300) throw RetractionDegenerate("retract: zero entry cannot be normalized");
    out(i) /= mod;
  }
  return out;
}

namespace {

double rinner(const CVec& a, const CVec& b) { return std::real(a.dot(b)); }

double modulus_err(const CirclePoint& b) {
  double worst = 0.0;
  for (int i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(std::abs(b(i)) - 1.0));
  return worst;
}

}  // namespace

std::pair<CirclePoint, RcgTrace> rcg_minimize(const AbfQuadratic& q, CirclePoint b0,
                                              const RcgOptions& opts) {
  if (b0.size() != q.dim()) throw std::invalid_argument("rcg_minimize: dimension mismatch");
  RcgTrace trace;

  CirclePoint b = std::move(b0);
  double fval = abf_objective(q, b);
  trace.objective.push_back(fval);
  trace.max_modulus_err = modulus_err(b);

  CVec grad = project_tangent(b, euclidean_grad(q, b));
  trace.initial_grad_norm = grad.norm();
  CVec dir = -grad;
  bool steepest = true;
  int since_reset = 0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    double slope = rinner(grad, dir);
    if (slope >= 0.0 && !steepest) {  // not a descent direction, restart
      dir = -grad;
      steepest = true;
      since_reset = 0;
      slope = rinner(grad, dir);
    }
    if (slope >= 0.0) {  // gradient numerically zero
      trace.termination = "stalled";
      break;
    }

    // Armijo backtracking along the retracted curve.
    double step = opts.init_step;
    bool accepted = false;
    CirclePoint b_next;
    double f_next = fval;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      try {
        b_next = retract(b, step, dir);
      } catch (const RetractionDegenerate&) {
        step *= opts.shrink;  // fall back to a shorter step
        continue;
      }
      f_next = abf_objective(q, b_next);
      if (f_next <= fval + opts.c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) {
      if (!steepest) {  // conjugate direction failed; retry from steepest
        dir = -grad;
        steepest = true;
        since_reset = 0;
        continue;
      }
      trace.termination = "stalled";
      break;
    }

    CVec grad_next = project_tangent(b_next, euclidean_grad(q, b_next));

    // Polak-Ribiere coefficient with projection transport, clipped at zero.
    double denom = grad.squaredNorm();
    double beta = 0.0;
    if (denom > 0.0) {
      const CVec grad_old_moved = project_tangent(b_next, grad);
      beta = std::max(0.0, rinner(grad_next, grad_next - grad_old_moved) / denom);
    }
    CVec dir_next = -grad_next + beta * project_tangent(b_next, dir);
    bool steepest_next = (beta == 0.0);

    ++since_reset;
    if (since_reset >= q.dim()) {  // periodic steepest-descent reset
      dir_next = -grad_next;
      steepest_next = true;
      since_reset = 0;
    }

    double delta = std::abs(fval - f_next);
    b = std::move(b_next);
    fval = f_next;
    grad = std::move(grad_next);
    dir = std::move(dir_next);
    steepest = steepest_next;
    trace.objective.push_back(fval);
    trace.max_modulus_err = std::max(trace.max_modulus_err, modulus_err(b));

    if (delta < opts.tol) {
      trace.termination = "tol";
      break;
    }
  }
  if (trace.termination.empty()) trace.termination = "max_iters";
  trace.final_grad_norm = grad.norm();
  return {b, trace};
}

}  // namespace sixdma::manifold
