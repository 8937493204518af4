// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "physopt/basis.hpp"
#include "physopt/types.hpp"

namespace physopt {

enum class Family { Helmholtz1d, Poisson1d, Nlrd1dt };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

inline constexpr int kPoissonModes = 16;
inline constexpr double kPoissonDecay = -0.5;

// u'' + omega^2 u = 0, u(0) = u0, u'(0) = v0.
struct HelmholtzParams {
  double omega = 1.0;
  double u0 = 0.0;
  double v0 = 0.0;
};

// -u'' = f, f(x) = (pi/K) sum_i a_i i^{2r} sin(pi x), u(0) = u0, u'(0) = v0.
struct PoissonParams {
  std::array<double, kPoissonModes> a{};
  double u0 = 0.0;
  double v0 = 0.0;
};

// u_t - nu u_xx - rho u (1 - u) = 0 with a Gaussian bump at t = 0.
struct NlrdParams {
  double nu = 1.0;
  double rho = 0.0;
};

using PdeParams = std::variant<HelmholtzParams, PoissonParams, NlrdParams>;

// A pointwise condition sum_i theta_i D^order psi_i(x_row) = target.
struct PointCondition {
  int row = 0;
  int order = 0;
  double target = 0.0;
};

struct PdeInstance {
  Family family = Family::Poisson1d;
  PdeParams params;
  Matrix grid;     // collocation points, m x dims
  int nx = 0;      // grid shape; nt = 1 for 1d families
  int nt = 1;
  Vector forcing;  // right-hand side at each grid row
  std::vector<PointCondition> conditions;

  int dims() const { return static_cast<int>(grid.cols()); }
  int num_points() const { return static_cast<int>(grid.rows()); }
};

double poisson_forcing(const PoissonParams& p, double x);
double nlrd_initial_profile(double x);

// Instances on an explicit grid. 1d grids must contain x = 0 as row 0.
PdeInstance make_helmholtz(const HelmholtzParams& p, const Vector& x);
PdeInstance make_poisson(const PoissonParams& p, const Vector& x);
// NLRD grid given as the x and t axes; rows are ordered time-major.
PdeInstance make_nlrd(const NlrdParams& p, const Vector& x, const Vector& t);

struct PdeLossConfig {
  double lambda_bc = 1.0;
  double interior_weight = 1.0;
  double boundary_weight = 1.0;
  std::vector<int> interior;  // rows entering the residual term
  std::vector<int> boundary;  // rows whose conditions enter the boundary term
};

// Interior = every row without a condition; boundary = rows with one.
PdeLossConfig default_loss_config(const PdeInstance& inst, double lambda_bc = 1.0);

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

// Instance, basis and loss split bundled with the per-row operator rows,
// so repeated evaluations only cost matrix-vector products.
class PdeProblem {
 public:
  PdeProblem(PdeInstance inst, std::shared_ptr<const BasisEval> basis, PdeLossConfig cfg);

  const PdeInstance& instance() const { return inst_; }
  const BasisEval& basis() const { return *basis_; }
  std::shared_ptr<const BasisEval> basis_ptr() const { return basis_; }
  const PdeLossConfig& config() const { return cfg_; }
  int size() const { return basis_->size(); }
  bool is_linear() const { return inst_.family != Family::Nlrd1dt; }

  double loss(const Vector& theta) const;
  LossAndGrad loss_and_grad(const Vector& theta) const;
  Vector hessian_vector(const Vector& theta, const Vector& v) const;
  Matrix hessian(const Vector& theta) const;

  // Interior residuals and boundary defects, unweighted.
  Vector interior_residual(const Vector& theta) const;
  Vector boundary_residual(const Vector& theta) const;

  // Basis values at all grid rows times theta.
  Vector reconstruct(const Vector& theta) const;

 private:
  PdeInstance inst_;
  std::shared_ptr<const BasisEval> basis_;
  PdeLossConfig cfg_;
  Matrix op_;      // linear part of the residual operator on interior rows
  Vector rhs_;     // forcing on interior rows
  Matrix psi_;     // basis values on interior rows (nonlinear term)
  Matrix bc_;      // condition rows
  Vector bc_target_;
  double rho_ = 0.0;
};

LossAndGrad residual_loss(const PdeInstance& inst, const BasisEval& basis, const Vector& theta,
                          const PdeLossConfig& cfg);

// L(theta) = theta^T A theta - 2 b^T theta + c for the linear families.
struct LinearSystem {
  Matrix A;
  Vector b;
  double c = 0.0;

  Vector gradient(const Vector& theta) const { return 2.0 * (A * theta - b); }
  double loss(const Vector& theta) const {
    return theta.dot(A * theta) - 2.0 * b.dot(theta) + c;
  }
};

LinearSystem assemble_linear_system(const PdeProblem& problem);
LinearSystem assemble_linear_system(const PdeInstance& inst, const BasisEval& basis,
                                    const PdeLossConfig& cfg);

// Closed-form solution (Helmholtz only).
Vector analytic_solution(const PdeInstance& inst, const Vector& x);

}  // namespace physopt
