// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "physopt/error.hpp"
#include "physopt/theory.hpp"

namespace physopt {

SymmetricEigen symmetric_eigen(const Matrix& A) {
  if (A.rows() != A.cols()) raise(ErrorKind::ShapeMismatch, "eigen solve needs a square matrix");
  const Eigen::Index n = A.rows();
  const double amax = n ? A.cwiseAbs().maxCoeff() : 0.0;
  const double asym = n ? (A - A.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-10 * std::max(1.0, amax))
    raise(ErrorKind::NonSymmetric, "max |A - A^T| = " + std::to_string(asym));

  Matrix a = 0.5 * (A + A.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double fro = a.norm();
  SymmetricEigen out;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-16 * fro || fro == 0.0) break;
    out.sweeps = sweep + 1;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Skip rotations below the resolution of the diagonal.
        if (std::abs(apq) < 1e-300) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(idx[k], idx[k]);
    out.vectors.col(k) = v.col(idx[k]);
  }
  return out;
}

}  // namespace physopt
