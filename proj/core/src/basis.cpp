// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "physopt/error.hpp"

namespace physopt {
namespace {

void check_spec(const BasisSpec& spec) {
  if (!(spec.domain.hi > spec.domain.lo))
    raise(ErrorKind::InvalidSpec, "empty domain interval");
  if (spec.n_terms < 1) raise(ErrorKind::InvalidSpec, "n_terms must be positive");
  if (spec.kind == BasisKind::BSpline) {
    if (spec.degree < 0) raise(ErrorKind::InvalidSpec, "negative degree");
    if (spec.n_terms < spec.degree + 1)
      raise(ErrorKind::InvalidSpec, "n_terms " + std::to_string(spec.n_terms) +
                                        " < degree + 1 = " + std::to_string(spec.degree + 1));
  } else if (spec.n_terms % 2 == 0) {
    raise(ErrorKind::InvalidSpec, "Fourier basis needs an odd number of terms");
  }
}

double checked_point(const Interval& dom, double x) {
  const double tol = 1e-12 * (dom.hi - dom.lo);
  if (!(x >= dom.lo - tol && x <= dom.hi + tol))
    raise(ErrorKind::OutOfDomain, "x = " + std::to_string(x) + " not in [" +
                                      std::to_string(dom.lo) + ", " + std::to_string(dom.hi) + "]");
  return x < dom.lo ? dom.lo : (x > dom.hi ? dom.hi : x);
}

void eval_bspline(const BasisSpec& spec, const Vector& points, BasisEval& out) {
  const KnotVector knots = build_bspline_knots(spec);
  const int p = spec.degree;
  const int n = spec.n_terms;
  const double t_lo = knots[p];
  const double t_hi = knots[n];
  const double slope = (t_hi - t_lo) / (spec.domain.hi - spec.domain.lo);
  const int nd = std::min(p, 2);
  for (Eigen::Index r = 0; r < points.size(); ++r) {
    const double x = checked_point(spec.domain, points[r]);
    double tau = t_lo + (x - spec.domain.lo) * slope;
    if (tau > t_hi) tau = t_hi;
    const int span = find_knot_span(n, p, tau, knots);
    const Matrix ders = bspline_basis_derivatives(span, tau, p, nd, knots);
    for (int j = 0; j <= p; ++j) {
      const int col = span - p + j;
      out.values(r, col) = ders(0, j);
      if (nd >= 1) out.dx(r, col) = ders(1, j) * slope;
      if (nd >= 2) out.dxx(r, col) = ders(2, j) * slope * slope;
    }
  }
}

void eval_fourier(const BasisSpec& spec, const Vector& points, BasisEval& out) {
  const int kmax = (spec.n_terms - 1) / 2;
  const double c0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double ck = 1.0 / std::sqrt(std::numbers::pi);
  for (Eigen::Index r = 0; r < points.size(); ++r) {
    const double x = checked_point(spec.domain, points[r]);
    out.values(r, 0) = c0;
    for (int k = 1; k <= kmax; ++k) {
      const double c = std::cos(k * x), s = std::sin(k * x);
      const double kk = static_cast<double>(k);
      out.values(r, 2 * k - 1) = ck * c;
      out.values(r, 2 * k) = ck * s;
      out.dx(r, 2 * k - 1) = -ck * kk * s;
      out.dx(r, 2 * k) = ck * kk * c;
      out.dxx(r, 2 * k - 1) = -ck * kk * kk * c;
      out.dxx(r, 2 * k) = -ck * kk * kk * s;
    }
  }
}

}  // namespace

BasisSpec fourier_spec(int max_wavenumber, Interval domain) {
  BasisSpec s;
  s.kind = BasisKind::Fourier;
  s.degree = 0;
  s.n_terms = 2 * max_wavenumber + 1;
  s.domain = domain;
  return s;
}

KnotVector build_bspline_knots(const BasisSpec& spec) {
  check_spec(spec);
  if (spec.kind != BasisKind::BSpline) raise(ErrorKind::InvalidSpec, "not a B-spline basis");
  const int p = spec.degree;
  const int n = spec.n_terms;
  KnotVector t(static_cast<std::size_t>(n + p + 1));
  if (spec.knots == KnotConfig::Shifted) {
    const double first = static_cast<double>(p) / n;
    const double h = 1.0 / (n + p);
    for (int k = 0; k <= n + p; ++k) t[k] = first + k * h;
    t[n + p] = 1.0 + first;
  } else {
    const int cells = n - p;
    for (int k = 0; k <= p; ++k) {
      t[k] = 0.0;
      t[n + k] = 1.0;
    }
    for (int j = 1; j < cells; ++j) t[p + j] = static_cast<double>(j) / cells;
  }
  return t;
}

int find_knot_span(int n_terms, int degree, double tau, const KnotVector& knots) {
  if (tau >= knots[n_terms]) return n_terms - 1;
  if (tau <= knots[degree]) return degree;
  int lo = degree, hi = n_terms;
  int mid = (lo + hi) / 2;
  while (tau < knots[mid] || tau >= knots[mid + 1]) {
    if (tau < knots[mid]) hi = mid;
    else lo = mid;
    mid = (lo + hi) / 2;
  }
  return mid;
}

Matrix bspline_basis_derivatives(int span, double tau, int degree, int n_derivs,
                                 const KnotVector& knots) {
  const int p = degree;
  Matrix ndu(p + 1, p + 1);
  Vector left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = tau - knots[span + 1 - j];
    right[j] = knots[span + j] - tau;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  Matrix ders = Matrix::Zero(n_derivs + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  Matrix a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= n_derivs; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double f = p;
  for (int k = 1; k <= n_derivs; ++k) {
    ders.row(k) *= f;
    f *= (p - k);
  }
  return ders;
}

BasisEval eval_basis(const BasisSpec& spec, const Vector& points) {
  check_spec(spec);
  BasisEval out;
  out.dims = 1;
  out.points = points;
  const Eigen::Index m = points.size();
  out.values = Matrix::Zero(m, spec.n_terms);
  out.dx = Matrix::Zero(m, spec.n_terms);
  out.dxx = Matrix::Zero(m, spec.n_terms);
  if (spec.kind == BasisKind::BSpline) eval_bspline(spec, points, out);
  else eval_fourier(spec, points, out);
  return out;
}

int tensor_size(int nx, int nt, TensorLayout layout) {
  return layout == TensorLayout::WithMarginals ? nx + nt + nx * nt : nx * nt;
}

int tensor_product_index(int nx, int nt, int ix, int it, TensorLayout layout) {
  const int offset = layout == TensorLayout::WithMarginals ? nx + nt : 0;
  return offset + ix * nt + it;
}

BasisEval tensor_basis(const BasisSpec& x_spec, const BasisSpec& t_spec, const Matrix& points,
                       TensorLayout layout) {
  if (points.cols() != 2)
    raise(ErrorKind::ShapeMismatch, "tensor basis needs (x, t) points, got " +
                                        std::to_string(points.cols()) + " columns");
  const BasisEval bx = eval_basis(x_spec, points.col(0));
  const BasisEval bt = eval_basis(t_spec, points.col(1));
  const int nx = bx.size(), nt = bt.size();
  const Eigen::Index m = points.rows();
  const int total = tensor_size(nx, nt, layout);
  BasisEval out;
  out.dims = 2;
  out.points = points;
  out.values = Matrix::Zero(m, total);
  out.dx = Matrix::Zero(m, total);
  out.dxx = Matrix::Zero(m, total);
  out.dt = Matrix::Zero(m, total);
  if (layout == TensorLayout::WithMarginals) {
    out.values.leftCols(nx) = bx.values;
    out.dx.leftCols(nx) = bx.dx;
    out.dxx.leftCols(nx) = bx.dxx;
    out.values.middleCols(nx, nt) = bt.values;
    out.dt.middleCols(nx, nt) = bt.dx;
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int c = tensor_product_index(nx, nt, i, j, layout);
      out.values.col(c) = bx.values.col(i).cwiseProduct(bt.values.col(j));
      out.dx.col(c) = bx.dx.col(i).cwiseProduct(bt.values.col(j));
      out.dxx.col(c) = bx.dxx.col(i).cwiseProduct(bt.values.col(j));
      out.dt.col(c) = bx.values.col(i).cwiseProduct(bt.dx.col(j));
    }
  }
  return out;
}

}  // namespace physopt
