// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/bench.hpp"

#include <cmath>
#include <limits>

#include "physopt/error.hpp"
#include "physopt/solver.hpp"

namespace physopt {

OptimTrace run_optimizer(const PdeProblem& problem, OptimizerKind kind, double lr, int steps,
                         const Vector& theta0, const Vector& reference, int record_every) {
  if (steps < 0 || record_every < 1) raise(ErrorKind::InvalidSpec, "bad optimizer run length");
  if (theta0.size() != problem.size()) raise(ErrorKind::ShapeMismatch, "theta0 has wrong length");
  const Objective objective = [&](const Vector& x, Vector& g) {
    LossAndGrad lg = problem.loss_and_grad(x);
    g = std::move(lg.grad);
    return lg.loss;
  };
  OptimTrace tr;
  Vector x = theta0, g;
  double f = objective(x, g);
  auto record = [&](int k) {
    tr.step.push_back(k);
    tr.pde_loss.push_back(f);
    tr.rel_mse.push_back(reference.size() ? relative_mse(problem.reconstruct(x), reference)
                                          : std::numeric_limits<double>::quiet_NaN());
  };
  record(0);
  Optimizer opt(kind, lr);
  for (int k = 1; k <= steps; ++k) {
    try {
      opt.step(x, f, g, objective);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Diverged) throw;
      tr.diverged = true;
      break;
    }
    if (!std::isfinite(f)) {
      tr.diverged = true;
      break;
    }
    if (k % record_every == 0 || k == steps) record(k);
  }
  tr.theta = x;
  return tr;
}

double inverse_curvature_lr(const PdeProblem& problem, const Vector& theta) {
  const int n = problem.size();
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = problem.hessian_vector(theta, v);
    const double next = w.norm();
    if (next == 0.0) raise(ErrorKind::InvalidSpec, "loss Hessian vanishes");
    v = w / next;
    if (std::abs(next - lambda) <= 1e-10 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return 1.0 / lambda;
}

}  // namespace physopt
