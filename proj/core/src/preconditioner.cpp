// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "physopt/error.hpp"
#include "physopt/rng.hpp"
#include "physopt/theory.hpp"

namespace physopt {

double preconditioner_objective(const Matrix& P, const Matrix& A, const Matrix& E, double eta,
                                int steps, Matrix* grad) {
  const Eigen::Index n = A.rows();
  const Matrix B = Matrix::Identity(n, n) - eta * P * A;
  std::vector<Matrix> powers(static_cast<std::size_t>(steps) + 1);
  powers[0] = Matrix::Identity(n, n);
  for (int j = 1; j <= steps; ++j) powers[j] = B * powers[j - 1];
  const Matrix R = powers[steps] * E;
  const double value = R.squaredNorm();
  if (grad) {
    // dM/dB = 2 sum_j (B^j)^T (B^L E E^T) (B^{L-1-j})^T, dM/dP = -eta dM/dB A^T
    const Matrix G = R * E.transpose();
    Matrix dB = Matrix::Zero(n, n);
    for (int j = 0; j < steps; ++j)
      dB += powers[j].transpose() * G * powers[steps - 1 - j].transpose();
    *grad = -2.0 * eta * dB * A.transpose();
  }
  return value;
}

namespace {

void summarize(LinearPreconditioner& out, const Matrix& A, double eta, int steps) {
  const Eigen::Index n = A.rows();
  const Matrix PA = out.P * A;
  Eigen::EigenSolver<Matrix> es(PA, false);
  const Eigen::VectorXcd mu = es.eigenvalues();
  double mx = 0.0, mn = std::numeric_limits<double>::infinity(), rad = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    mx = std::max(mx, std::abs(mu[i]));
    mn = std::min(mn, std::abs(mu[i]));
    rad = std::max(rad, std::abs(1.0 - eta * mu[i]));
  }
  out.kappa_PA = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
  out.spectral_radius = rad;
  Matrix BL = Matrix::Identity(n, n);
  const Matrix B = Matrix::Identity(n, n) - eta * PA;
  for (int j = 0; j < steps; ++j) BL = B * BL;
  Eigen::JacobiSVD<Matrix> svd(BL);
  out.nilpotency_norm = svd.singularValues()[0];
}

}  // namespace

LinearPreconditioner train_linear_preconditioner(const Matrix& A, const std::vector<Vector>& rhs,
                                                 const PreconditionerOptions& opts) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) raise(ErrorKind::ShapeMismatch, "A must be square");
  if (opts.steps < 1 || !(opts.eta > 0.0)) raise(ErrorKind::InvalidSpec, "need L >= 1 and eta > 0");
  if (static_cast<Eigen::Index>(rhs.size()) < n)
    raise(ErrorKind::InvalidSpec, "need at least N instances for a full-rank error matrix");
  const auto ldlt = A.ldlt();
  Rng rng(derive_seed(opts.seed, {0x70726563ULL}));
  Matrix E(n, static_cast<Eigen::Index>(rhs.size()));
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    Vector theta0(n);
    for (Eigen::Index i = 0; i < n; ++i) theta0[i] = rng.normal();
    E.col(static_cast<Eigen::Index>(k)) = theta0 - ldlt.solve(rhs[k]);
  }
  const double scale = 1.0 / E.squaredNorm();

  LinearPreconditioner out;
  const double eta = opts.eta;
  const int L = opts.steps;
  const Eigen::Index m = E.cols();
  const Eigen::Index nn = n * n;
  Matrix P = Matrix::Zero(n, n);

  // Levenberg-Marquardt on the residual R(P) = (I - eta P A)^L E.
  const auto residual = [&](const Matrix& Pm, std::vector<Matrix>& powers) {
    const Matrix B = Matrix::Identity(n, n) - eta * Pm * A;
    powers.assign(static_cast<std::size_t>(L) + 1, Matrix::Identity(n, n));
    for (int j = 1; j <= L; ++j) powers[j] = B * powers[j - 1];
    return Matrix(powers[L] * E);
  };
  std::vector<Matrix> powers, trial_powers;
  Matrix R = residual(P, powers);
  double f = R.squaredNorm() * scale;
  out.loss_history.push_back(f);
  double mu = 1e-3;
  Matrix J(n * m, nn);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (f < opts.tolerance) break;
    // Column (a, b) of J: -eta sum_j B^j e_a (A B^{L-1-j} E)_b.
    J.setZero();
    for (int j = 0; j < L; ++j) {
      const Matrix right = A * powers[L - 1 - j] * E;
      for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = 0; a < n; ++a) {
          Eigen::Map<Matrix> col(J.col(a + n * b).data(), n, m);
          col.noalias() -= eta * powers[j].col(a) * right.row(b);
        }
    }
    const Matrix H = J.transpose() * J * scale;
    const Vector g = J.transpose() * Eigen::Map<const Vector>(R.data(), n * m) * scale;
    const Vector d = H.diagonal().cwiseMax(1e-300);
    bool accepted = false;
    for (int trial = 0; trial < 60 && !accepted; ++trial) {
      Matrix damped = H;
      damped.diagonal() += mu * d;
      const Vector step = damped.ldlt().solve(-g);
      const Matrix cand = P + Eigen::Map<const Matrix>(step.data(), n, n);
      const Matrix Rc = residual(cand, trial_powers);
      const double fc = Rc.squaredNorm() * scale;
      if (std::isfinite(fc) && fc < f) {
        P = cand;
        R = Rc;
        f = fc;
        powers.swap(trial_powers);
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    out.iterations = it + 1;
    out.loss_history.push_back(f);
    if (!accepted) break;  // stagnated
  }
  if (f < opts.tolerance) out.converged = true;
  out.objective = f;
  out.P = P;
  summarize(out, A, opts.eta, opts.steps);
  return out;
}

LinearPreconditioner train_linear_preconditioner(const Matrix& A, const PreconditionerOptions& opts) {
  const Eigen::Index n = A.rows();
  const int count = opts.instances > 0 ? opts.instances : static_cast<int>(4 * n);
  Rng rng(derive_seed(opts.seed, {0x726873ULL}));
  std::vector<Vector> rhs(static_cast<std::size_t>(count));
  for (auto& b : rhs) {
    b.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.normal();
  }
  return train_linear_preconditioner(A, rhs, opts);
}

StepCount preconditioned_step_count(const LinearSystem& sys, const Matrix& P, double eta, double eps,
                                    const Vector& theta0, long cap) {
  const Vector theta_star = sys.A.ldlt().solve(sys.b);
  Vector theta = theta0;
  const double e0 = (theta - theta_star).norm();
  StepCount out;
  if (e0 == 0.0) return out;
  double prev = e0;
  while (true) {
    const double e = (theta - theta_star).norm();
    if (out.steps > 0) out.worst_contraction = std::max(out.worst_contraction, e / prev);
    prev = e;
    if (e <= eps * e0) break;
    if (out.steps >= cap) {
      out.capped = true;
      break;
    }
    theta -= eta * (P * (sys.A * theta - sys.b));
    if (!theta.allFinite()) raise(ErrorKind::Diverged, "preconditioned iteration diverged");
    ++out.steps;
  }
  out.final_ratio = (theta - theta_star).norm() / e0;
  return out;
}

}  // namespace physopt
