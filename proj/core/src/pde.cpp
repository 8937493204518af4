// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "physopt/error.hpp"

namespace physopt {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Helmholtz1d: return "helmholtz";
    case Family::Poisson1d: return "poisson";
    case Family::Nlrd1dt: return "nlrd";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "helmholtz") return Family::Helmholtz1d;
  if (name == "poisson") return Family::Poisson1d;
  if (name == "nlrd") return Family::Nlrd1dt;
  raise(ErrorKind::UnsupportedFamily, "unknown family '" + std::string(name) + "'");
}

double poisson_forcing(const PoissonParams& p, double x) {
  double s = 0.0;
  for (int i = 1; i <= kPoissonModes; ++i)
    s += p.a[i - 1] * std::pow(static_cast<double>(i), 2.0 * kPoissonDecay);
  return std::numbers::pi / kPoissonModes * s * std::sin(std::numbers::pi * x);
}

double nlrd_initial_profile(double x) { return std::exp(-32.0 * (x - 0.5) * (x - 0.5)); }

namespace {

void check_origin(const Vector& x) {
  if (x.size() < 2) raise(ErrorKind::ShapeMismatch, "grid needs at least two points");
  if (x[0] != 0.0) raise(ErrorKind::InvalidSpec, "first grid point must be x = 0");
}

PdeInstance make_1d(Family family, PdeParams params, const Vector& x, double u0, double v0) {
  check_origin(x);
  PdeInstance inst;
  inst.family = family;
  inst.params = std::move(params);
  inst.grid = x;
  inst.nx = static_cast<int>(x.size());
  inst.nt = 1;
  inst.forcing = Vector::Zero(x.size());
  inst.conditions = {{0, 0, u0}, {0, 1, v0}};
  return inst;
}

}  // namespace

PdeInstance make_helmholtz(const HelmholtzParams& p, const Vector& x) {
  if (!(p.omega > 0.0)) raise(ErrorKind::InvalidSpec, "omega must be positive");
  return make_1d(Family::Helmholtz1d, p, x, p.u0, p.v0);
}

PdeInstance make_poisson(const PoissonParams& p, const Vector& x) {
  PdeInstance inst = make_1d(Family::Poisson1d, p, x, p.u0, p.v0);
  for (Eigen::Index j = 0; j < x.size(); ++j) inst.forcing[j] = poisson_forcing(p, x[j]);
  return inst;
}

PdeInstance make_nlrd(const NlrdParams& p, const Vector& x, const Vector& t) {
  if (!(p.nu > 0.0)) raise(ErrorKind::InvalidSpec, "nu must be positive");
  if (t.size() < 2 || t[0] != 0.0) raise(ErrorKind::InvalidSpec, "time axis must start at t = 0");
  PdeInstance inst;
  inst.family = Family::Nlrd1dt;
  inst.params = p;
  inst.nx = static_cast<int>(x.size());
  inst.nt = static_cast<int>(t.size());
  inst.grid.resize(inst.nx * inst.nt, 2);
  for (int n = 0; n < inst.nt; ++n) {
    for (int j = 0; j < inst.nx; ++j) {
      inst.grid(n * inst.nx + j, 0) = x[j];
      inst.grid(n * inst.nx + j, 1) = t[n];
    }
  }
  inst.forcing = Vector::Zero(inst.grid.rows());
  for (int j = 0; j < inst.nx; ++j) inst.conditions.push_back({j, 0, nlrd_initial_profile(x[j])});
  return inst;
}

PdeLossConfig default_loss_config(const PdeInstance& inst, double lambda_bc) {
  PdeLossConfig cfg;
  cfg.lambda_bc = lambda_bc;
  std::set<int> bc_rows;
  for (const auto& c : inst.conditions) bc_rows.insert(c.row);
  for (int r = 0; r < inst.num_points(); ++r) {
    if (bc_rows.count(r)) cfg.boundary.push_back(r);
    else cfg.interior.push_back(r);
  }
  return cfg;
}

PdeProblem::PdeProblem(PdeInstance inst, std::shared_ptr<const BasisEval> basis,
                       PdeLossConfig cfg)
    : inst_(std::move(inst)), basis_(std::move(basis)), cfg_(std::move(cfg)) {
  if (!basis_) raise(ErrorKind::InvalidSpec, "missing basis");
  const BasisEval& B = *basis_;
  const int m = inst_.num_points();
  if (B.num_points() != m)
    raise(ErrorKind::ShapeMismatch, "basis evaluated on " + std::to_string(B.num_points()) +
                                        " points, instance has " + std::to_string(m));
  if (B.dims != inst_.dims())
    raise(ErrorKind::ShapeMismatch, "basis and instance dimensions differ");
  if (inst_.forcing.size() != m) raise(ErrorKind::ShapeMismatch, "forcing size mismatch");
  if (!(cfg_.lambda_bc > 0.0)) raise(ErrorKind::InvalidSpec, "lambda_bc must be positive");

  std::set<int> seen;
  for (int r : cfg_.interior) {
    if (r < 0 || r >= m) raise(ErrorKind::ShapeMismatch, "interior row out of range");
    seen.insert(r);
  }
  for (int r : cfg_.boundary) {
    if (r < 0 || r >= m) raise(ErrorKind::ShapeMismatch, "boundary row out of range");
    if (seen.count(r)) raise(ErrorKind::InvalidSpec, "interior and boundary rows overlap");
  }
  const std::set<int> bset(cfg_.boundary.begin(), cfg_.boundary.end());

  const int n = B.size();
  const int ni = static_cast<int>(cfg_.interior.size());
  op_.resize(ni, n);
  rhs_.resize(ni);
  psi_.resize(0, n);
  double nu = 0.0;
  double omega2 = 0.0;
  if (const auto* h = std::get_if<HelmholtzParams>(&inst_.params)) omega2 = h->omega * h->omega;
  if (const auto* q = std::get_if<NlrdParams>(&inst_.params)) {
    nu = q->nu;
    rho_ = q->rho;
    if (B.dims != 2) raise(ErrorKind::ShapeMismatch, "NLRD needs a 2d basis");
    psi_.resize(ni, n);
  }
  for (int k = 0; k < ni; ++k) {
    const int r = cfg_.interior[k];
    switch (inst_.family) {
      case Family::Helmholtz1d: op_.row(k) = B.dxx.row(r) + omega2 * B.values.row(r); break;
      case Family::Poisson1d: op_.row(k) = -B.dxx.row(r); break;
      case Family::Nlrd1dt:
        op_.row(k) = B.dt.row(r) - nu * B.dxx.row(r);
        psi_.row(k) = B.values.row(r);
        break;
    }
    rhs_[k] = inst_.forcing[r];
  }

  std::vector<const PointCondition*> active;
  for (const auto& c : inst_.conditions)
    if (bset.count(c.row)) active.push_back(&c);
  bc_.resize(static_cast<Eigen::Index>(active.size()), n);
  bc_target_.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto& c = *active[k];
    if (c.order == 0) bc_.row(k) = B.values.row(c.row);
    else if (c.order == 1) bc_.row(k) = B.dx.row(c.row);
    else raise(ErrorKind::InvalidSpec, "condition order must be 0 or 1");
    bc_target_[k] = c.target;
  }
}

Vector PdeProblem::interior_residual(const Vector& theta) const {
  if (theta.size() != size())
    raise(ErrorKind::ShapeMismatch, "theta has " + std::to_string(theta.size()) +
                                        " entries, basis has " + std::to_string(size()));
  Vector r = op_ * theta - rhs_;
  if (!is_linear()) {
    const Vector u = psi_ * theta;
    r.array() -= rho_ * u.array() * (1.0 - u.array());
  }
  return r;
}

Vector PdeProblem::boundary_residual(const Vector& theta) const {
  return bc_ * theta - bc_target_;
}

Vector PdeProblem::reconstruct(const Vector& theta) const { return basis_->values * theta; }

double PdeProblem::loss(const Vector& theta) const {
  const Vector r = interior_residual(theta);
  const Vector s = boundary_residual(theta);
  const double l = cfg_.interior_weight * r.squaredNorm() +
                   cfg_.lambda_bc * cfg_.boundary_weight * s.squaredNorm();
  if (!std::isfinite(l)) raise(ErrorKind::Diverged, "non-finite PDE loss");
  return l;
}

LossAndGrad PdeProblem::loss_and_grad(const Vector& theta) const {
  const Vector r = interior_residual(theta);
  const Vector s = boundary_residual(theta);
  const double wi = cfg_.interior_weight;
  const double wb = cfg_.lambda_bc * cfg_.boundary_weight;
  LossAndGrad out;
  out.loss = wi * r.squaredNorm() + wb * s.squaredNorm();
  if (!std::isfinite(out.loss)) raise(ErrorKind::Diverged, "non-finite PDE loss");
  out.grad = 2.0 * wb * (bc_.transpose() * s);
  if (is_linear()) {
    out.grad.noalias() += 2.0 * wi * (op_.transpose() * r);
  } else {
    // J_j = op_j - rho (1 - 2 u_j) psi_j
    const Vector u = psi_ * theta;
    const Vector w = (rho_ * (1.0 - 2.0 * u.array()) * r.array()).matrix();
    out.grad.noalias() += 2.0 * wi * (op_.transpose() * r - psi_.transpose() * w);
  }
  return out;
}

Vector PdeProblem::hessian_vector(const Vector& theta, const Vector& v) const {
  if (v.size() != size()) raise(ErrorKind::ShapeMismatch, "direction size mismatch");
  const double wi = cfg_.interior_weight;
  const double wb = cfg_.lambda_bc * cfg_.boundary_weight;
  Vector hv = 2.0 * wb * (bc_.transpose() * (bc_ * v));
  if (is_linear()) {
    hv.noalias() += 2.0 * wi * (op_.transpose() * (op_ * v));
    return hv;
  }
  // H = 2 sum_j (J_j J_j^T + r_j 2 rho psi_j psi_j^T) + boundary part
  const Vector u = psi_ * theta;
  const Vector r = interior_residual(theta);
  const Vector a = (rho_ * (1.0 - 2.0 * u.array())).matrix();
  const Vector pv = psi_ * v;
  const Vector jv = op_ * v - a.cwiseProduct(pv);
  hv.noalias() += 2.0 * wi * (op_.transpose() * jv - psi_.transpose() * a.cwiseProduct(jv));
  hv.noalias() += 2.0 * wi * (psi_.transpose() * (2.0 * rho_ * r.cwiseProduct(pv)));
  return hv;
}

Matrix PdeProblem::hessian(const Vector& theta) const {
  const int n = size();
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) h.col(i) = hessian_vector(theta, Vector::Unit(n, i));
  return 0.5 * (h + h.transpose());
}

LossAndGrad residual_loss(const PdeInstance& inst, const BasisEval& basis, const Vector& theta,
                          const PdeLossConfig& cfg) {
  PdeProblem problem(inst, std::make_shared<BasisEval>(basis), cfg);
  return problem.loss_and_grad(theta);
}

LinearSystem assemble_linear_system(const PdeProblem& problem) {
  if (!problem.is_linear())
    raise(ErrorKind::UnsupportedFamily, "linear system requested for a nonlinear family");
  const int n = problem.size();
  const Vector zero = Vector::Zero(n);
  LinearSystem sys;
  sys.A = 0.5 * problem.hessian(zero);
  // Loss at zero is c, gradient at zero is -2b.
  const LossAndGrad at0 = problem.loss_and_grad(zero);
  sys.b = -0.5 * at0.grad;
  sys.c = at0.loss;
  return sys;
}

LinearSystem assemble_linear_system(const PdeInstance& inst, const BasisEval& basis,
                                    const PdeLossConfig& cfg) {
  return assemble_linear_system(PdeProblem(inst, std::make_shared<BasisEval>(basis), cfg));
}

Vector analytic_solution(const PdeInstance& inst, const Vector& x) {
  const auto* p = std::get_if<HelmholtzParams>(&inst.params);
  if (!p) raise(ErrorKind::UnsupportedFamily, "no closed form for this family");
  double alpha = 0.0, beta = 0.0;
  if (p->u0 != 0.0) {
    beta = std::atan(-p->v0 / (p->omega * p->u0));
    alpha = p->u0 / std::cos(beta);
  } else {
    beta = -std::numbers::pi / 2.0;
    alpha = p->v0 / p->omega;
  }
  Vector u(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) u[j] = alpha * std::cos(p->omega * x[j] + beta);
  return u;
}

}  // namespace physopt
