// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <string>

#include "physopt/error.hpp"
#include "physopt/rng.hpp"
#include "physopt/theory.hpp"

namespace physopt {

ConditioningReport spectrum_and_kappa(const Matrix& A) {
  const SymmetricEigen eig = symmetric_eigen(A);
  ConditioningReport r;
  r.n = static_cast<int>(A.rows());
  r.spectrum = eig.values;
  if (r.n == 0) return r;
  r.lambda_max = eig.values[r.n - 1];
  if (!(r.lambda_max > 0.0)) raise(ErrorKind::InvalidSpec, "matrix has no positive eigenvalue");
  const double floor = kNullThreshold * r.lambda_max;
  r.lambda_min = r.lambda_max;
  for (int i = 0; i < r.n; ++i) {
    if (eig.values[i] > floor) {
      ++r.rank;
      r.lambda_min = std::min(r.lambda_min, eig.values[i]);
    }
  }
  r.kappa = r.lambda_max / r.lambda_min;
  return r;
}

ConditioningReport spectrum_and_kappa(const LinearSystem& sys) { return spectrum_and_kappa(sys.A); }

StepCount gd_step_count(const LinearSystem& sys, double eps, double c, const Vector& theta0,
                        long cap) {
  if (!(c > 0.0 && c < 1.0)) raise(ErrorKind::InvalidSpec, "step constant c must be in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) raise(ErrorKind::InvalidSpec, "eps must be in (0, 1)");
  const ConditioningReport rep = spectrum_and_kappa(sys);
  const Vector theta_star = sys.A.ldlt().solve(sys.b);
  // Half-scaled loss: the step on theta^T A theta - 2 b^T theta is lr = c / (2 lambda_max).
  const double lr = c / (2.0 * rep.lambda_max);
  Vector theta = theta0;
  const double e0 = (theta - theta_star).norm();
  StepCount out;
  if (e0 == 0.0) return out;
  double prev = e0;
  const double target = eps * e0;
  Vector r(theta.size());
  while (true) {
    const double e = (theta - theta_star).norm();
    if (out.steps > 0) out.worst_contraction = std::max(out.worst_contraction, e / prev);
    prev = e;
    if (e <= target) break;
    if (out.steps >= cap) {
      out.capped = true;
      break;
    }
    r.noalias() = sys.A * theta;
    r -= sys.b;
    theta -= (2.0 * lr) * r;
    ++out.steps;
  }
  out.final_ratio = (theta - theta_star).norm() / e0;
  return out;
}

StepCount gd_step_count(const LinearSystem& sys, double eps, double c, std::uint64_t seed, long cap) {
  Rng rng(seed);
  Vector theta0(sys.A.rows());
  for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] = rng.normal();
  return gd_step_count(sys, eps, c, theta0, cap);
}

FourierPoisson fourier_poisson(int K, double lambda_bc, const Vector& forcing_coeffs) {
  if (K < 1) raise(ErrorKind::InvalidSpec, "K must be positive");
  const double pi = std::numbers::pi;
  const Interval dom{-pi, pi};
  const BasisSpec spec = fourier_spec(K, dom);
  const int n = spec.n_terms;
  if (forcing_coeffs.size() != 0 && forcing_coeffs.size() != n)
    raise(ErrorKind::ShapeMismatch, "forcing coefficients must have 2K+1 entries");
  const int m = 4 * K + 4;
  Vector x(m + 2);
  for (int j = 0; j < m; ++j) x[j] = -pi + 2.0 * pi * (j + 0.5) / m;
  x[m] = -pi;
  x[m + 1] = pi;

  FourierPoisson fp;
  fp.basis = eval_basis(spec, x);
  PdeInstance& inst = fp.instance;
  inst.family = Family::Poisson1d;
  inst.params = PoissonParams{};
  inst.grid = x;
  inst.nx = m + 2;
  inst.nt = 1;
  // -u'' = f with u = sum_i c_i phi_i.
  inst.forcing = forcing_coeffs.size() ? Vector(-fp.basis.dxx * forcing_coeffs) : Vector::Zero(m + 2);
  inst.conditions = {{m, 0, 0.0}, {m + 1, 0, 0.0}};
  fp.config.lambda_bc = lambda_bc;
  fp.config.interior_weight = 2.0 * pi / m;
  fp.config.boundary_weight = 0.5;
  for (int j = 0; j < m; ++j) fp.config.interior.push_back(j);
  fp.config.boundary = {m, m + 1};
  return fp;
}

LinearSystem fourier_poisson_system(int K, double lambda_bc) {
  const int n = 2 * K + 1;
  Vector coeffs(n);
  for (int i = 0; i < n; ++i) coeffs[i] = 1.0 / (1.0 + i);
  const FourierPoisson fp = fourier_poisson(K, lambda_bc, coeffs);
  return assemble_linear_system(fp.instance, fp.basis, fp.config);
}

}  // namespace physopt
