// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>

#include "physopt/types.hpp"

namespace physopt::nnet {

using ComplexVector = Eigen::VectorXcd;

// Unitary transforms: X_k = N^{-1/2} sum_n x_n exp(-2 pi i k n / N).
// Power-of-two lengths use an iterative radix-2 path, others the direct sum.
ComplexVector dft_1d(const ComplexVector& x);
ComplexVector dft_1d(const Vector& x);
ComplexVector idft_1d(const ComplexVector& spectrum);

ComplexVector dft_naive(const ComplexVector& x, bool inverse = false);

// Real matrices for a transform truncated to the lowest `modes` frequencies
// of a real signal of length n, and the Hermitian-completing inverse.
//   Re X = fwd_re * x, Im X = fwd_im * x            (modes x n)
//   x = inv_re * Re X + inv_im * Im X               (n x modes)
struct TruncatedRealDft {
  int n = 0;
  int modes = 0;
  Matrix fwd_re, fwd_im;
  Matrix inv_re, inv_im;
};

// Cached per (n, modes); thread-safe. Requires 1 <= modes <= n/2 + 1.
const TruncatedRealDft& truncated_real_dft(int n, int modes);

}  // namespace physopt::nnet
