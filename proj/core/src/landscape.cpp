// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <tuple>

#include "physopt/error.hpp"
#include "physopt/parallel.hpp"
#include "physopt/rng.hpp"
#include "physopt/theory.hpp"

namespace physopt {

std::pair<Vector, Vector> plane_basis(const Vector& w1, const Vector& w2, const Vector& w3) {
  if (w1.size() != w2.size() || w1.size() != w3.size())
    raise(ErrorKind::ShapeMismatch, "plane points differ in length");
  Vector u = w2 - w1;
  const double nu = u.norm();
  if (nu == 0.0) raise(ErrorKind::DegenerateBasis, "w2 - w1 = 0");
  u /= nu;
  Vector v = w3 - w1;
  v -= u.dot(v) * u;
  v -= u.dot(v) * u;  // second pass for orthogonality to rounding
  const double nv = v.norm();
  if (nv <= 1e-14 * (w3 - w1).norm() || nv == 0.0)
    raise(ErrorKind::DegenerateBasis, "w3 - w1 is parallel to w2 - w1");
  v /= nv;
  return {u, v};
}

LandscapeSlice landscape_slice(const PdeProblem& problem, const Vector& anchor,
                               const Vector& companion, const LandscapeOptions& opts,
                               const Vector& target,
                               const std::vector<std::vector<Vector>>& trajectories) {
  const int n = problem.size();
  if (anchor.size() != n || companion.size() != n)
    raise(ErrorKind::ShapeMismatch, "anchor/companion length differs from basis size");
  if (opts.resolution < 2) raise(ErrorKind::InvalidSpec, "resolution must be at least 2");
  if (opts.loss == LandscapeLoss::Data && target.size() != problem.instance().num_points())
    raise(ErrorKind::ShapeMismatch, "data loss needs a target on every grid point");

  LandscapeSlice out;
  Vector w2, w3;
  if (opts.basis == LandscapeBasis::Random) {
    if ((companion - anchor).norm() == 0.0)
      raise(ErrorKind::DegenerateBasis, "anchor and companion coincide");
    Rng rng(derive_seed(opts.seed, {0x6c616e64ULL}));
    w3.resize(n);
    for (int i = 0; i < n; ++i) w3[i] = anchor[i] + rng.normal();
    w2 = companion;
  } else {
    const SymmetricEigen eig = symmetric_eigen(problem.hessian(anchor));
    const double lmax = eig.values[n - 1];
    int imin = n - 1;
    for (int i = 0; i < n; ++i) {
      if (eig.values[i] > kNullThreshold * lmax) {
        imin = i;
        break;
      }
    }
    if (imin == n - 1) raise(ErrorKind::DegenerateBasis, "Hessian has a single positive eigenvalue");
    w2 = anchor + eig.vectors.col(n - 1);
    w3 = anchor + eig.vectors.col(imin);
    out.lambda_u = lmax;
    out.lambda_v = eig.values[imin];
  }
  std::tie(out.u_hat, out.v_hat) = plane_basis(anchor, w2, w3);

  const int r = opts.resolution;
  out.alphas.resize(r);
  out.betas.resize(r);
  for (int i = 0; i < r; ++i) {
    const double s = -1.0 + 2.0 * i / (r - 1);
    out.alphas[i] = s * opts.alpha_span;
    out.betas[i] = s * opts.beta_span;
  }
  out.values.resize(r, r);
  const Matrix& psi = problem.basis().values;
  parallel_for(static_cast<std::size_t>(r), [&](std::size_t i) {
    for (int j = 0; j < r; ++j) {
      const Vector theta = anchor + out.alphas[i] * out.u_hat + out.betas[j] * out.v_hat;
      if (opts.loss == LandscapeLoss::Pde) {
        out.values(i, j) = problem.loss(theta);
      } else {
        out.values(i, j) = (psi * theta - target).squaredNorm() / static_cast<double>(target.size());
      }
    }
  });
  for (const auto& traj : trajectories) {
    std::vector<std::pair<double, double>> proj;
    for (const Vector& theta : traj) {
      if (theta.size() != n) raise(ErrorKind::ShapeMismatch, "trajectory point has wrong length");
      const Vector d = theta - anchor;
      proj.emplace_back(d.dot(out.u_hat), d.dot(out.v_hat));
    }
    out.trajectories.push_back(std::move(proj));
  }
  return out;
}

}  // namespace physopt
