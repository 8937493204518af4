// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "physopt/types.hpp"

namespace physopt {

enum class BasisKind { BSpline, Fourier };
enum class KnotConfig { Shifted, Equispaced };
enum class TensorLayout { WithMarginals, ProductOnly };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// One-dimensional basis description. For Fourier, n_terms = 2K + 1 and the
// degree/knots fields are ignored.
struct BasisSpec {
  BasisKind kind = BasisKind::BSpline;
  int degree = 3;
  int n_terms = 32;
  KnotConfig knots = KnotConfig::Shifted;
  Interval domain{0.0, 1.0};
};

BasisSpec fourier_spec(int max_wavenumber, Interval domain);

using KnotVector = std::vector<double>;

// Values and partial derivatives of every basis function at every point.
// Rows are points, columns are basis indices. dt is empty in one dimension.
struct BasisEval {
  int dims = 1;
  Matrix points;  // m x dims
  Matrix values;  // m x N
  Matrix dx;      // d/dx
  Matrix dxx;     // d^2/dx^2
  Matrix dt;      // d/dt

  int size() const { return static_cast<int>(values.cols()); }
  int num_points() const { return static_cast<int>(values.rows()); }
};

KnotVector build_bspline_knots(const BasisSpec& spec);

// Index of the knot span [t_i, t_{i+1}) holding tau, clamped to [degree, n-1]
// so the right end of the valid range belongs to the last span.
int find_knot_span(int n_terms, int degree, double tau, const KnotVector& knots);

// Nonzero basis functions at tau and their derivatives up to order n_derivs
// (Piegl & Tiller, A2.3). out(k, j) is the k-th derivative of N_{span-p+j}.
Matrix bspline_basis_derivatives(int span, double tau, int degree, int n_derivs,
                                 const KnotVector& knots);

BasisEval eval_basis(const BasisSpec& spec, const Vector& points);

// 2d basis on (x, t) points, m x 2.
BasisEval tensor_basis(const BasisSpec& x_spec, const BasisSpec& t_spec, const Matrix& points,
                       TensorLayout layout = TensorLayout::WithMarginals);

int tensor_size(int nx, int nt, TensorLayout layout);

// Column of the product psi_ix(x) chi_it(t) in a tensor basis.
int tensor_product_index(int nx, int nt, int ix, int it, TensorLayout layout);

}  // namespace physopt
