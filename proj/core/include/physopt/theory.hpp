// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "physopt/pde.hpp"
#include "physopt/types.hpp"

namespace physopt {

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns, orthonormal
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Throws NonSymmetric if A differs from its
// transpose by more than 1e-10 * max(1, max|A|).
SymmetricEigen symmetric_eigen(const Matrix& A);

inline constexpr double kNullThreshold = 1e-10;

struct ConditioningReport {
  Vector spectrum;  // ascending
  double lambda_max = 0.0;
  double lambda_min = 0.0;  // smallest eigenvalue above the null threshold
  double kappa = 0.0;
  int rank = 0;              // eigenvalues above kNullThreshold * lambda_max
  int n = 0;
};

ConditioningReport spectrum_and_kappa(const LinearSystem& sys);
ConditioningReport spectrum_and_kappa(const Matrix& A);

struct StepCount {
  long steps = 0;
  bool capped = false;
  double final_ratio = 0.0;  // ||theta_k - theta*|| / ||theta_0 - theta*||
  double worst_contraction = 0.0;  // max per-step error ratio
};

inline constexpr long kStepCap = 10'000'000;

// Gradient descent Theta <- Theta - (c / lambda_max)(A Theta - b), the
// half-scaled loss convention, counted until the error has shrunk by eps.
StepCount gd_step_count(const LinearSystem& sys, double eps, double c, std::uint64_t seed,
                        long cap = kStepCap);
StepCount gd_step_count(const LinearSystem& sys, double eps, double c, const Vector& theta0,
                        long cap = kStepCap);

// Periodic Poisson problem u'' = -f on [-pi, pi] in the Fourier basis with
// wavenumbers up to K: m midpoint interior points with quadrature weight
// 2 pi / m, and zero-value conditions at both ends with weight 1/2, so the
// assembled A equals diag(0, 1, 1, 16, 16, ...) + lambda phi(pi) phi(pi)^T.
struct FourierPoisson {
  PdeInstance instance;
  BasisEval basis;
  PdeLossConfig config;
};

FourierPoisson fourier_poisson(int K, double lambda_bc = 1.0, const Vector& forcing_coeffs = {});
LinearSystem fourier_poisson_system(int K, double lambda_bc = 1.0);

struct LinearPreconditioner {
  Matrix P;
  double kappa_PA = 0.0;          // max|mu| / min|mu| over eigenvalues of PA
  double spectral_radius = 0.0;   // of I - eta P A
  double nilpotency_norm = 0.0;   // ||(I - eta P A)^L||_2
  double objective = 0.0;         // final normalized training loss
  std::vector<double> loss_history;
  bool converged = false;
  int iterations = 0;
};

struct PreconditionerOptions {
  int steps = 2;  // L
  double eta = 1.0;
  int instances = 0;  // 0: 4N
  int max_iterations = 500;
  double tolerance = 1e-14;  // stop when the normalized loss falls below
  std::uint64_t seed = 0;
};

// Minimizes sum_k ||(I - eta P A)^L (Theta_0k - Theta*_k)||^2 over P with
// Levenberg-Marquardt from P = 0, for systems sharing A and differing in b.
LinearPreconditioner train_linear_preconditioner(const Matrix& A, const std::vector<Vector>& rhs,
                                                 const PreconditionerOptions& opts);
LinearPreconditioner train_linear_preconditioner(const Matrix& A, const PreconditionerOptions& opts);

// Objective and gradient used by the trainer, with errors E = [e_k].
double preconditioner_objective(const Matrix& P, const Matrix& A, const Matrix& E, double eta,
                                int steps, Matrix* grad);

// Iterations of Theta <- Theta - eta P (A Theta - b) until the error shrinks
// by eps (cap on the count).
StepCount preconditioned_step_count(const LinearSystem& sys, const Matrix& P, double eta,
                                    double eps, const Vector& theta0, long cap = kStepCap);

enum class LandscapeLoss { Pde, Data };
enum class LandscapeBasis { Random, Hessian };

struct LandscapeOptions {
  LandscapeLoss loss = LandscapeLoss::Pde;
  LandscapeBasis basis = LandscapeBasis::Hessian;
  int resolution = 41;       // grid points per axis (odd keeps the anchor on a node)
  double alpha_span = 1.0;   // alpha in [-span, span]
  double beta_span = 1.0;
  std::uint64_t seed = 0;    // for the random third point
};

struct LandscapeSlice {
  Vector u_hat, v_hat;
  Vector alphas, betas;
  Matrix values;  // values(i, j) = loss(anchor + alphas[i] u + betas[j] v)
  std::vector<std::vector<std::pair<double, double>>> trajectories;
  double lambda_u = 0.0, lambda_v = 0.0;  // Hessian eigenvalues (Hessian basis)
};

// Plane through the anchor: Random uses w2 = companion, w3 random; Hessian
// uses w2/w3 = anchor + eigenvectors of the largest/smallest positive
// Hessian eigenvalues. Data loss is the mean squared error to `target`.
LandscapeSlice landscape_slice(const PdeProblem& problem, const Vector& anchor,
                               const Vector& companion, const LandscapeOptions& opts,
                               const Vector& target = {},
                               const std::vector<std::vector<Vector>>& trajectories = {});

// Orthonormal (u, v) from three points by Gram-Schmidt.
std::pair<Vector, Vector> plane_basis(const Vector& w1, const Vector& w2, const Vector& w3);

}  // namespace physopt
