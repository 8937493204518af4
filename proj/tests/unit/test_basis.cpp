// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "physopt/basis.hpp"
#include "physopt/error.hpp"
#include "physopt/rng.hpp"

using namespace physopt;

namespace {

BasisSpec cubic(int n, KnotConfig k = KnotConfig::Shifted) {
  BasisSpec s;
  s.degree = 3;
  s.n_terms = n;
  s.knots = k;
  return s;
}

// Parameter value for a domain point, as the evaluator maps it.
double to_tau(const BasisSpec& s, const KnotVector& t, double x) {
  const double lo = t[s.degree], hi = t[s.n_terms];
  return lo + (x - s.domain.lo) / (s.domain.hi - s.domain.lo) * (hi - lo);
}

Vector linspace(double a, double b, int n) { return Vector::LinSpaced(n, a, b); }

void expect_throws_kind(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Knots, ShiftedDegree3N10) {
  const KnotVector t = build_bspline_knots(cubic(10));
  ASSERT_EQ(t.size(), 14u);
  EXPECT_NEAR(t.front(), 0.3, 1e-15);
  EXPECT_NEAR(t.back(), 1.3, 1e-15);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] - t[i - 1], 1.0 / 13.0, 1e-14);
}

TEST(Knots, ShiftedDegree3N32) {
  const KnotVector t = build_bspline_knots(cubic(32));
  ASSERT_EQ(t.size(), 36u);
  EXPECT_NEAR(t.front(), 3.0 / 32.0, 1e-15);
  EXPECT_NEAR(t.back(), 1.0 + 3.0 / 32.0, 1e-15);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] - t[i - 1], 1.0 / 35.0, 1e-14);
}

TEST(Knots, EquispacedDegree0IsFourCells) {
  BasisSpec s;
  s.degree = 0;
  s.n_terms = 4;
  s.knots = KnotConfig::Equispaced;
  const KnotVector t = build_bspline_knots(s);
  ASSERT_EQ(t.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(t[i], i / 4.0);
  const BasisEval e = eval_basis(s, Vector{{0.1, 0.3, 0.6, 0.9, 1.0}});
  const int cells[] = {0, 1, 2, 3, 3};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(e.values(r, c), c == cells[r] ? 1.0 : 0.0);
}

TEST(Knots, EquispacedHasClampedEnds) {
  const KnotVector t = build_bspline_knots(cubic(10, KnotConfig::Equispaced));
  ASSERT_EQ(t.size(), 14u);
  for (int i = 0; i <= 3; ++i) {
    EXPECT_EQ(t[i], 0.0);
    EXPECT_EQ(t[13 - i], 1.0);
  }
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i - 1], t[i]);
}

TEST(Knots, TooFewTermsIsInvalid) {
  expect_throws_kind(ErrorKind::InvalidSpec, [] { build_bspline_knots(cubic(3)); });
}

TEST(EvalBasis, PartitionOfUnity) {
  for (KnotConfig k : {KnotConfig::Shifted, KnotConfig::Equispaced}) {
    for (int n : {4, 10, 32}) {
      const BasisEval e = eval_basis(cubic(n, k), linspace(0.0, 1.0, 257));
      for (int r = 0; r < e.num_points(); ++r)
        EXPECT_LT(std::abs(e.values.row(r).sum() - 1.0), 1e-12);
      // Derivatives of a partition of unity sum to zero.
      EXPECT_LT(e.dx.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(EvalBasis, MatchesCoxDeBoorAtCellMidpoints) {
  for (KnotConfig k : {KnotConfig::Shifted, KnotConfig::Equispaced}) {
    const BasisSpec s = cubic(12, k);
    const KnotVector t = build_bspline_knots(s);
    Vector x(s.n_terms * 2);
    for (int i = 0; i < x.size(); ++i) x[i] = (i + 0.5) / x.size();
    const BasisEval e = eval_basis(s, x);
    const double slope = (t[s.n_terms] - t[s.degree]);
    for (int r = 0; r < x.size(); ++r) {
      const double tau = to_tau(s, t, x[r]);
      for (int c = 0; c < s.n_terms; ++c) {
        EXPECT_NEAR(e.values(r, c), oracle::cox_de_boor(c, 3, t, tau), 1e-13);
        EXPECT_NEAR(e.dx(r, c), slope * oracle::cox_de_boor_derivative(c, 3, 1, t, tau), 1e-10);
        EXPECT_NEAR(e.dxx(r, c), slope * slope * oracle::cox_de_boor_derivative(c, 3, 2, t, tau),
                    1e-8);
      }
    }
  }
}

TEST(EvalBasis, DerivativesMatchFiniteDifferences) {
  BasisSpec s = cubic(16);
  s.domain = {-1.0, 2.0};
  const double h = 1e-5;
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(-0.95, 1.95);
    const BasisEval c = eval_basis(s, Vector{{x}});
    const BasisEval p = eval_basis(s, Vector{{x + h}});
    const BasisEval m = eval_basis(s, Vector{{x - h}});
    const Vector fd1 = (p.values - m.values).row(0).transpose() / (2 * h);
    const Vector fd2 = (p.dx - m.dx).row(0).transpose() / (2 * h);
    const Vector d1 = c.dx.row(0).transpose();
    const Vector d2 = c.dxx.row(0).transpose();
    EXPECT_LT((fd1 - d1).norm(), 1e-6 * d1.norm());
    EXPECT_LT((fd2 - d2).norm(), 1e-6 * d2.norm());
  }
}

TEST(EvalBasis, LocalSupport) {
  const BasisSpec s = cubic(20);
  const KnotVector t = build_bspline_knots(s);
  const int spans = s.n_terms - s.degree;
  // Count, per function, the knot spans on which it is nonzero.
  const int per_span = 9;
  Vector x(spans * per_span);
  for (int i = 0; i < x.size(); ++i) x[i] = (i + 0.5) / x.size();
  const BasisEval e = eval_basis(s, x);
  for (int c = 0; c < s.n_terms; ++c) {
    int active = 0;
    for (int sp = 0; sp < spans; ++sp) {
      bool nz = false;
      for (int k = 0; k < per_span; ++k) nz = nz || e.values(sp * per_span + k, c) != 0.0;
      active += nz;
    }
    EXPECT_LE(active, s.degree + 1) << "function " << c;
    EXPECT_GE(active, 1);
  }
  (void)t;
}

TEST(EvalBasis, DegreeOneHasZeroSecondDerivative) {
  BasisSpec s;
  s.degree = 1;
  s.n_terms = 6;
  const BasisEval e = eval_basis(s, linspace(0.0, 1.0, 31));
  EXPECT_EQ(e.dxx.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(e.values.allFinite());
}

TEST(EvalBasis, ReconstructsLinearCombination) {
  const BasisSpec s = cubic(10);
  const Vector x = linspace(0.0, 1.0, 17);
  const BasisEval e = eval_basis(s, x);
  const KnotVector t = build_bspline_knots(s);
  Vector theta = Vector::LinSpaced(10, -1.0, 2.0);
  const Vector u = e.values * theta;
  for (int r = 0; r < x.size(); ++r) {
    double ref = 0.0;
    for (int c = 0; c < 10; ++c) ref += theta[c] * oracle::cox_de_boor(c, 3, t, to_tau(s, t, x[r]));
    EXPECT_NEAR(u[r], ref, 1e-13);
  }
}

TEST(EvalBasis, OutOfDomainIsRejected) {
  expect_throws_kind(ErrorKind::OutOfDomain, [] { eval_basis(cubic(8), Vector{{1.01}}); });
  expect_throws_kind(ErrorKind::OutOfDomain, [] { eval_basis(cubic(8), Vector{{-0.5}}); });
  expect_throws_kind(ErrorKind::OutOfDomain,
                     [] { eval_basis(fourier_spec(2, {-3.0, 3.0}), Vector{{3.2}}); });
}

TEST(Fourier, ClosedFormAtHalfPi) {
  const BasisEval e = eval_basis(fourier_spec(1, {-std::numbers::pi, std::numbers::pi}),
                                 Vector{{std::numbers::pi / 2}});
  ASSERT_EQ(e.size(), 3);
  EXPECT_NEAR(e.values(0, 0), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(e.values(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(e.values(0, 2), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(e.dx(0, 1), -1.0 / std::sqrt(std::numbers::pi), 1e-15);
}

TEST(Fourier, OrthonormalUnderTrapezoid) {
  const double pi = std::numbers::pi;
  const int m = 4096;
  const Vector x = linspace(-pi, pi, m + 1);
  const BasisEval e = eval_basis(fourier_spec(6, {-pi, pi}), x);
  Vector w = Vector::Constant(m + 1, 2 * pi / m);
  w[0] *= 0.5;
  w[m] *= 0.5;
  const Matrix G = e.values.transpose() * w.asDiagonal() * e.values;
  EXPECT_LT((G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fourier, EvenTermCountIsInvalid) {
  BasisSpec s = fourier_spec(2, {0.0, 1.0});
  s.n_terms = 4;
  expect_throws_kind(ErrorKind::InvalidSpec, [&] { eval_basis(s, Vector{{0.5}}); });
}

TEST(Tensor, IndexMapMatchesDirectEvaluation) {
  const BasisSpec sx = cubic(4);
  BasisSpec st;
  st.degree = 2;
  st.n_terms = 3;
  const KnotVector tx = build_bspline_knots(sx), tt = build_bspline_knots(st);
  Rng rng(11);
  Matrix pts(5, 2);
  for (int r = 0; r < 5; ++r) pts.row(r) << rng.uniform(), rng.uniform();
  const BasisEval e = tensor_basis(sx, st, pts);
  ASSERT_EQ(e.size(), 4 + 3 + 12);
  for (int r = 0; r < 5; ++r) {
    const double a = to_tau(sx, tx, pts(r, 0)), b = to_tau(st, tt, pts(r, 1));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.values(r, i), oracle::cox_de_boor(i, 3, tx, a), 1e-13);
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(e.values(r, 4 + j), oracle::cox_de_boor(j, 2, tt, b), 1e-13);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) {
        const int c = tensor_product_index(4, 3, i, j, TensorLayout::WithMarginals);
        EXPECT_EQ(c, 7 + i * 3 + j);
        EXPECT_NEAR(e.values(r, c),
                    oracle::cox_de_boor(i, 3, tx, a) * oracle::cox_de_boor(j, 2, tt, b), 1e-13);
      }
  }
}

TEST(Tensor, ProductOnlyLayout) {
  const BasisSpec sx = cubic(4);
  BasisSpec st;
  st.degree = 2;
  st.n_terms = 3;
  Matrix pts(2, 2);
  pts << 0.2, 0.7, 0.9, 0.1;
  const BasisEval full = tensor_basis(sx, st, pts);
  const BasisEval prod = tensor_basis(sx, st, pts, TensorLayout::ProductOnly);
  ASSERT_EQ(prod.size(), 12);
  EXPECT_EQ(tensor_size(4, 3, TensorLayout::ProductOnly), 12);
  EXPECT_LT((prod.values - full.values.rightCols(12)).cwiseAbs().maxCoeff(), 1e-15);
  // Products of two partitions of unity.
  for (int r = 0; r < 2; ++r) EXPECT_NEAR(prod.values.row(r).sum(), 1.0, 1e-12);
}

TEST(Tensor, SingleConstantFunction) {
  BasisSpec s;
  s.degree = 0;
  s.n_terms = 1;
  Matrix pts(3, 2);
  pts << 0.0, 0.0, 0.5, 0.3, 1.0, 1.0;
  const BasisEval e = tensor_basis(s, s, pts, TensorLayout::ProductOnly);
  ASSERT_EQ(e.size(), 1);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(e.values(r, 0), 1.0);
}

TEST(Tensor, DerivativesAreSeparable) {
  const BasisSpec sx = cubic(6);
  const BasisSpec st = cubic(5);
  Matrix pts(4, 2);
  pts << 0.1, 0.2, 0.4, 0.9, 0.75, 0.5, 1.0, 0.0;
  const BasisEval e = tensor_basis(sx, st, pts);
  const BasisEval bx = eval_basis(sx, pts.col(0));
  const BasisEval bt = eval_basis(st, pts.col(1));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j) {
      const int c = tensor_product_index(6, 5, i, j, TensorLayout::WithMarginals);
      for (int r = 0; r < 4; ++r) {
        EXPECT_DOUBLE_EQ(e.dxx(r, c), bx.dxx(r, i) * bt.values(r, j));
        EXPECT_DOUBLE_EQ(e.dx(r, c), bx.dx(r, i) * bt.values(r, j));
        EXPECT_DOUBLE_EQ(e.dt(r, c), bx.values(r, i) * bt.dx(r, j));
      }
    }
  // Pure-t block carries no x derivative.
  EXPECT_EQ(e.dx.middleCols(6, 5).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tensor, NeedsTwoColumns) {
  expect_throws_kind(ErrorKind::ShapeMismatch,
                     [] { tensor_basis(cubic(4), cubic(4), Matrix::Zero(3, 1)); });
}
