// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "physopt/basis.hpp"
#include "physopt/error.hpp"
#include "physopt/pde.hpp"
#include "physopt/rng.hpp"

using namespace physopt;

namespace {

BasisSpec cubic(int n) {
  BasisSpec s;
  s.n_terms = n;
  return s;
}

Vector unit_grid(int m) { return Vector::LinSpaced(m, 0.0, 1.0); }

PoissonParams random_poisson(Rng& rng) {
  PoissonParams p;
  for (double& a : p.a) a = rng.uniform(-100.0, 100.0);
  p.u0 = rng.normal();
  p.v0 = rng.normal();
  return p;
}

struct Case {
  PdeInstance inst;
  std::shared_ptr<BasisEval> basis;
};

Case make_case(Family f, Rng& rng) {
  Case c;
  switch (f) {
    case Family::Helmholtz1d: {
      HelmholtzParams p{rng.uniform(0.5, 50.0), rng.normal(), rng.normal()};
      c.inst = make_helmholtz(p, unit_grid(64));
      c.basis = std::make_shared<BasisEval>(eval_basis(cubic(32), c.inst.grid.col(0)));
      break;
    }
    case Family::Poisson1d:
      c.inst = make_poisson(random_poisson(rng), unit_grid(64));
      c.basis = std::make_shared<BasisEval>(eval_basis(cubic(32), c.inst.grid.col(0)));
      break;
    case Family::Nlrd1dt: {
      NlrdParams p{rng.uniform(1.0, 5.0), rng.uniform(-5.0, 5.0)};
      c.inst = make_nlrd(p, Vector::LinSpaced(16, 0.0, 15.0 / 16.0), unit_grid(9));
      c.basis = std::make_shared<BasisEval>(tensor_basis(cubic(8), cubic(5), c.inst.grid));
      break;
    }
  }
  return c;
}

double grad_rel_error(const PdeProblem& prob, const Vector& theta, double h) {
  const Vector g = prob.loss_and_grad(theta).grad;
  const Vector fd = oracle::central_difference([&](const Vector& t) { return prob.loss(t); },
                                               theta, h);
  return (g - fd).norm() / g.norm();
}

}  // namespace

TEST(Family, NamesRoundTrip) {
  for (Family f : {Family::Helmholtz1d, Family::Poisson1d, Family::Nlrd1dt})
    EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("darcy"), Error);
}

TEST(Instances, PoissonForcingVanishesAtOrigin) {
  Rng rng(1);
  EXPECT_EQ(poisson_forcing(random_poisson(rng), 0.0), 0.0);
}

TEST(Instances, GridMustStartAtOrigin) {
  EXPECT_THROW(make_poisson({}, Vector::LinSpaced(5, 0.1, 1.0)), Error);
}

TEST(Instances, NlrdRowsAreTimeMajorWithInitialConditions) {
  const Vector x = Vector::LinSpaced(4, 0.0, 0.75), t = Vector::LinSpaced(3, 0.0, 1.0);
  const PdeInstance inst = make_nlrd({2.0, 1.0}, x, t);
  ASSERT_EQ(inst.num_points(), 12);
  EXPECT_EQ(inst.grid(5, 0), x[1]);
  EXPECT_EQ(inst.grid(5, 1), t[1]);
  ASSERT_EQ(inst.conditions.size(), 4u);
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(inst.conditions[j].row, j);
    EXPECT_DOUBLE_EQ(inst.conditions[j].target, std::exp(-32.0 * (x[j] - 0.5) * (x[j] - 0.5)));
  }
}

TEST(Loss, ZeroAnsatzPoisson) {
  Rng rng(2);
  const Case c = make_case(Family::Poisson1d, rng);
  const auto& p = std::get<PoissonParams>(c.inst.params);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const PdeLossConfig cfg = default_loss_config(c.inst, lambda);
    const double loss = residual_loss(c.inst, *c.basis, Vector::Zero(32), cfg).loss;
    const double expect = c.inst.forcing.squaredNorm() + lambda * (p.u0 * p.u0 + p.v0 * p.v0);
    EXPECT_NEAR(loss, expect, 1e-12 * expect);
  }
}

TEST(Loss, HelmholtzExactSolutionInFourierBasis) {
  const double pi = std::numbers::pi;
  for (double omega : {1.0, 2.0, 5.0}) {
    HelmholtzParams p{omega, 0.7, -1.3};
    const PdeInstance inst = make_helmholtz(p, unit_grid(64));
    const int K = static_cast<int>(omega);
    const BasisEval b = eval_basis(fourier_spec(K, {0.0, 1.0}), inst.grid.col(0));
    // u = u0 cos(w x) + (v0 / w) sin(w x)
    Vector theta = Vector::Zero(2 * K + 1);
    theta[2 * K - 1] = p.u0 * std::sqrt(pi);
    theta[2 * K] = p.v0 / omega * std::sqrt(pi);
    PdeProblem prob(inst, std::make_shared<BasisEval>(b), default_loss_config(inst));
    EXPECT_LT(prob.interior_residual(theta).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(prob.loss(theta), 1e-8);
    EXPECT_LT((prob.reconstruct(theta) - analytic_solution(inst, inst.grid.col(0))).norm(), 1e-12);
  }
}

class GradientExactness : public ::testing::TestWithParam<Family> {};

TEST_P(GradientExactness, MatchesCentralDifferences) {
  Rng rng(derive_seed(5, {static_cast<std::uint64_t>(GetParam())}));
  for (int draw = 0; draw < 100; ++draw) {
    const Case c = make_case(GetParam(), rng);
    PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst, rng.uniform(0.5, 2.0)));
    Vector theta(prob.size());
    for (int i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
    EXPECT_LT(grad_rel_error(prob, theta, 1e-6), 1e-6) << "draw " << draw;
  }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, GradientExactness,
                         ::testing::Values(Family::Helmholtz1d, Family::Poisson1d,
                                           Family::Nlrd1dt));

TEST(Hessian, NlrdHessianVectorMatchesGradientDifferences) {
  Rng rng(8);
  for (int draw = 0; draw < 10; ++draw) {
    const Case c = make_case(Family::Nlrd1dt, rng);
    PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst));
    Vector theta(prob.size()), v(prob.size());
    for (int i = 0; i < theta.size(); ++i) {
      theta[i] = 0.3 * rng.normal();
      v[i] = rng.normal();
    }
    const double h = 1e-5;
    const Vector fd = (prob.loss_and_grad(theta + h * v).grad -
                       prob.loss_and_grad(theta - h * v).grad) / (2 * h);
    const Vector hv = prob.hessian_vector(theta, v);
    EXPECT_LT((hv - fd).norm(), 1e-7 * hv.norm());
  }
}

TEST(LinearSystem, QuadraticFormReproducesLoss) {
  Rng rng(9);
  for (Family f : {Family::Helmholtz1d, Family::Poisson1d}) {
    const Case c = make_case(f, rng);
    PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst));
    const LinearSystem sys = assemble_linear_system(prob);
    EXPECT_LT((sys.A - sys.A.transpose()).cwiseAbs().maxCoeff(), 1e-10 * sys.A.cwiseAbs().maxCoeff());
    for (int k = 0; k < 10; ++k) {
      Vector theta(prob.size());
      for (int i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
      const LossAndGrad lg = prob.loss_and_grad(theta);
      EXPECT_NEAR(sys.loss(theta), lg.loss, 1e-9 * std::max(1.0, lg.loss));
      EXPECT_LT((sys.gradient(theta) - lg.grad).norm(), 1e-10 * std::max(1.0, lg.grad.norm()));
    }
  }
}

TEST(LinearSystem, IsPositiveSemidefinite) {
  Rng rng(10);
  const Case c = make_case(Family::Helmholtz1d, rng);
  const LinearSystem sys = assemble_linear_system(c.inst, *c.basis,
                                                  default_loss_config(c.inst));
  Eigen::SelfAdjointEigenSolver<Matrix> es(sys.A);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * es.eigenvalues().maxCoeff());
}

TEST(LinearSystem, StationaryPointSolvesNormalEquations) {
  Rng rng(12);
  const Case c = make_case(Family::Poisson1d, rng);
  PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst));
  const LinearSystem sys = assemble_linear_system(prob);
  const Vector theta = sys.A.ldlt().solve(sys.b);
  const double g = prob.loss_and_grad(theta).grad.norm();
  EXPECT_LT(g, 1e-6 * sys.b.norm());
}

TEST(LinearSystem, SingleConstantFunction) {
  BasisSpec s;
  s.degree = 0;
  s.n_terms = 1;
  PoissonParams p;
  p.a[0] = 10.0;
  p.u0 = 0.4;
  p.v0 = -2.0;
  const PdeInstance inst = make_poisson(p, unit_grid(9));
  const BasisEval b = eval_basis(s, inst.grid.col(0));
  const double lambda = 3.0;
  const LinearSystem sys = assemble_linear_system(inst, b, default_loss_config(inst, lambda));
  ASSERT_EQ(sys.A.rows(), 1);
  EXPECT_DOUBLE_EQ(sys.A(0, 0), lambda);
  EXPECT_DOUBLE_EQ(sys.b[0], lambda * p.u0);
}

TEST(LinearSystem, NlrdIsUnsupported) {
  Rng rng(13);
  const Case c = make_case(Family::Nlrd1dt, rng);
  try {
    assemble_linear_system(c.inst, *c.basis, default_loss_config(c.inst));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedFamily);
  }
}

TEST(Loss, ShapeMismatches) {
  Rng rng(14);
  const Case c = make_case(Family::Poisson1d, rng);
  PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst));
  EXPECT_THROW(prob.loss(Vector::Zero(5)), Error);
  const BasisEval other = eval_basis(cubic(32), unit_grid(10));
  EXPECT_THROW(residual_loss(c.inst, other, Vector::Zero(32), default_loss_config(c.inst)), Error);
}

TEST(Loss, OverflowIsDivergence) {
  Rng rng(15);
  const Case c = make_case(Family::Poisson1d, rng);
  PdeProblem prob(c.inst, c.basis, default_loss_config(c.inst));
  try {
    prob.loss(Vector::Constant(32, 1e300));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Diverged);
  }
}

TEST(Analytic, ClosedForms) {
  const Vector x = unit_grid(33);
  const Vector a = analytic_solution(make_helmholtz({1.0, 1.0, 0.0}, x), x);
  const Vector b = analytic_solution(make_helmholtz({2.0, 0.0, 2.0}, x), x);
  for (int j = 0; j < x.size(); ++j) {
    EXPECT_NEAR(a[j], std::cos(x[j]), 1e-15);
    EXPECT_NEAR(b[j], std::sin(2 * x[j]), 1e-15);
  }
}

TEST(Analytic, AgreesWithRk4) {
  const HelmholtzParams p{7.3, 0.4, -1.1};
  const Vector x{{0.0, 0.5}};
  const double u = analytic_solution(make_helmholtz(p, x), x)[1];
  // alpha cos(omega x + beta) with beta = atan(-v0 / (omega u0)), alpha = u0 / cos(beta)
  const double beta = std::atan(1.1 / (7.3 * 0.4));
  EXPECT_NEAR(u, 0.4 / std::cos(beta) * std::cos(7.3 * 0.5 + beta), 1e-14);
  EXPECT_NEAR(u, oracle::helmholtz_rk4(p.omega, p.u0, p.v0, 0.5, 20000), 1e-10);
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const HelmholtzParams q{rng.uniform(0.5, 50.0), k == 0 ? 0.0 : rng.normal(), rng.normal()};
    const double xe = rng.uniform();
    const Vector pts{{0.0, xe}};
    EXPECT_NEAR(analytic_solution(make_helmholtz(q, pts), pts)[1],
                oracle::helmholtz_rk4(q.omega, q.u0, q.v0, xe, 50000), 1e-7);
  }
}

TEST(Analytic, OnlyHelmholtz) {
  EXPECT_THROW(analytic_solution(make_poisson({}, unit_grid(4)), unit_grid(4)), Error);
}
