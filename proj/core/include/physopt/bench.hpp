// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "physopt/optim.hpp"
#include "physopt/pde.hpp"

namespace physopt {

struct OptimTrace {
  std::vector<int> step;
  std::vector<double> pde_loss;
  std::vector<double> rel_mse;  // NaN when no reference is given
  Vector theta;                 // final iterate
  bool diverged = false;        // stopped early on a non-finite value
};

// Runs a classical optimizer on L_PDE of one instance from theta0 for
// `steps` updates, recording step 0, every `record_every`-th step and the
// last step.
OptimTrace run_optimizer(const PdeProblem& problem, OptimizerKind kind, double lr, int steps,
                         const Vector& theta0, const Vector& reference = {}, int record_every = 1);

// 1 / lambda_max of the loss Hessian at theta (power iteration on
// Hessian-vector products).
double inverse_curvature_lr(const PdeProblem& problem, const Vector& theta);

}  // namespace physopt
