// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/nnet/dft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "physopt/error.hpp"

namespace physopt::nnet {
namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

ComplexVector radix2(const ComplexVector& x, bool inverse) {
  const Eigen::Index n = x.size();
  ComplexVector a = x;
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (Eigen::Index i = 0; i < n; i += len) {
      for (Eigen::Index k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * k), std::sin(ang * k));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  return a / std::sqrt(static_cast<double>(n));
}

}  // namespace

ComplexVector dft_naive(const ComplexVector& x, bool inverse) {
  const Eigen::Index n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  ComplexVector out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) /
                         static_cast<double>(n);
      s += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = s / std::sqrt(static_cast<double>(n));
  }
  return out;
}

ComplexVector dft_1d(const ComplexVector& x) {
  if (x.size() < 1) raise(ErrorKind::ShapeMismatch, "empty signal");
  return is_power_of_two(x.size()) ? radix2(x, false) : dft_naive(x, false);
}

ComplexVector dft_1d(const Vector& x) { return dft_1d(ComplexVector(x.cast<std::complex<double>>())); }

ComplexVector idft_1d(const ComplexVector& spectrum) {
  if (spectrum.size() < 1) raise(ErrorKind::ShapeMismatch, "empty spectrum");
  return is_power_of_two(spectrum.size()) ? radix2(spectrum, true) : dft_naive(spectrum, true);
}

const TruncatedRealDft& truncated_real_dft(int n, int modes) {
  if (n < 1 || modes < 1 || modes > n / 2 + 1)
    raise(ErrorKind::InvalidSpec, "modes " + std::to_string(modes) + " invalid for length " +
                                      std::to_string(n));
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<TruncatedRealDft>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n, modes}];
  if (!slot) {
    auto t = std::make_unique<TruncatedRealDft>();
    t->n = n;
    t->modes = modes;
    t->fwd_re.resize(modes, n);
    t->fwd_im.resize(modes, n);
    t->inv_re.resize(n, modes);
    t->inv_im.resize(n, modes);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < modes; ++k) {
      // Weight of mode k in the Hermitian completion: its conjugate partner
      // contributes the same real part, except for DC and Nyquist.
      const bool self_conjugate = (k == 0) || (2 * k == n);
      const double c = self_conjugate ? 1.0 : 2.0;
      for (int j = 0; j < n; ++j) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / n;
        t->fwd_re(k, j) = scale * std::cos(ang);
        t->fwd_im(k, j) = -scale * std::sin(ang);
        t->inv_re(j, k) = c * scale * std::cos(ang);
        t->inv_im(j, k) = -c * scale * std::sin(ang);
      }
    }
    slot = std::move(t);
  }
  return *slot;
}

}  // namespace physopt::nnet
