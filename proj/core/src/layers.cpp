// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <string>

#include "physopt/error.hpp"
#include "physopt/nnet/dft.hpp"
#include "physopt/nnet/tape.hpp"
#include "physopt/pde.hpp"

namespace physopt::nnet {
namespace {

using ConstMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void check_params(const Tape& t, std::size_t offset, std::size_t count, const char* op) {
  if (offset + count > t.params().size())
    raise(ErrorKind::ShapeMismatch, std::string(op) + ": parameter slice out of range");
}

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

}  // namespace

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

Var dense(Tape& t, Var x, std::size_t offset, int in, int out) {
  const Matrix& xv = t.value(x);
  if (xv.cols() != in)
    raise(ErrorKind::ShapeMismatch, "dense: input has " + std::to_string(xv.cols()) +
                                        " columns, layer expects " + std::to_string(in));
  const std::size_t nw = static_cast<std::size_t>(in) * out;
  check_params(t, offset, nw + out, "dense");
  const double* p = t.params().data() + offset;
  const ConstMap w(p, in, out);
  const Eigen::Map<const Eigen::RowVectorXd> b(p + nw, out);
  Matrix y = xv * w;
  y.rowwise() += b;
  return t.record(std::move(y), true, [x, offset, in, out, nw](Tape& tp, const Matrix& g) {
    const double* pp = tp.params().data() + offset;
    const ConstMap wm(pp, in, out);
    const Matrix& xval = tp.value(x);
    const Matrix gw = xval.transpose() * g;  // in x out
    double* gp = tp.param_grad_data() + offset;
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) gp[static_cast<std::size_t>(i) * out + j] += gw(i, j);
    const Eigen::RowVectorXd gb = g.colwise().sum();
    for (int j = 0; j < out; ++j) gp[nw + j] += gb[j];
    if (tp.needs_grad(x)) tp.accumulate(x, g * wm.transpose());
  });
}

Var gelu(Tape& t, Var x) {
  const Matrix y = t.value(x).unaryExpr([](double v) { return gelu_value(v); });
  return t.record(y, t.needs_grad(x), [x](Tape& tp, const Matrix& g) {
    const Matrix d = tp.value(x).unaryExpr([](double v) { return gelu_grad(v); });
    tp.accumulate(x, g.cwiseProduct(d));
  });
}

std::size_t spectral_conv_param_count(int width, int modes) {
  const std::size_t c2 = static_cast<std::size_t>(width) * width;
  return 2 * static_cast<std::size_t>(modes) * c2 + c2 + width;
}

// Parameter layout at offset: W_re[modes][in][out], W_im[modes][in][out].
Var spectral_mix(Tape& t, Var x, std::size_t offset, int width, int modes) {
  const Matrix& xv = t.value(x);
  if (xv.cols() != width) raise(ErrorKind::ShapeMismatch, "spectral conv: width mismatch");
  const int n = static_cast<int>(xv.rows());
  const TruncatedRealDft& F = truncated_real_dft(n, modes);
  const std::size_t c2 = static_cast<std::size_t>(width) * width;
  check_params(t, offset, 2 * modes * c2, "spectral conv");
  const double* p = t.params().data() + offset;
  const Matrix xr = F.fwd_re * xv;  // modes x width
  const Matrix xi = F.fwd_im * xv;
  Matrix yr(modes, width), yi(modes, width);
  for (int k = 0; k < modes; ++k) {
    const ConstMap wr(p + k * c2, width, width);
    const ConstMap wi(p + (modes + k) * c2, width, width);
    yr.row(k) = xr.row(k) * wr - xi.row(k) * wi;
    yi.row(k) = xr.row(k) * wi + xi.row(k) * wr;
  }
  Matrix y = F.inv_re * yr + F.inv_im * yi;
  return t.record(std::move(y), true,
                  [x, offset, width, modes, n, c2, xr, xi](Tape& tp, const Matrix& g) {
                    const TruncatedRealDft& Fb = truncated_real_dft(n, modes);
                    const double* pp = tp.params().data() + offset;
                    double* gp = tp.param_grad_data() + offset;
                    const Matrix gr = Fb.inv_re.transpose() * g;  // modes x width
                    const Matrix gi = Fb.inv_im.transpose() * g;
                    Matrix gxr(modes, width), gxi(modes, width);
                    for (int k = 0; k < modes; ++k) {
                      const ConstMap wr(pp + k * c2, width, width);
                      const ConstMap wi(pp + (modes + k) * c2, width, width);
                      const Matrix dwr = xr.row(k).transpose() * gr.row(k) +
                                         xi.row(k).transpose() * gi.row(k);
                      const Matrix dwi = xr.row(k).transpose() * gi.row(k) -
                                         xi.row(k).transpose() * gr.row(k);
                      for (int a = 0; a < width; ++a) {
                        for (int b = 0; b < width; ++b) {
                          gp[k * c2 + a * width + b] += dwr(a, b);
                          gp[(modes + k) * c2 + a * width + b] += dwi(a, b);
                        }
                      }
                      gxr.row(k) = gr.row(k) * wr.transpose() + gi.row(k) * wi.transpose();
                      gxi.row(k) = gi.row(k) * wr.transpose() - gr.row(k) * wi.transpose();
                    }
                    if (tp.needs_grad(x))
                      tp.accumulate(x, Fb.fwd_re.transpose() * gxr + Fb.fwd_im.transpose() * gxi);
                  });
}

Var spectral_conv(Tape& t, Var x, std::size_t offset, int width, int modes) {
  const std::size_t c2 = static_cast<std::size_t>(width) * width;
  const Var spec = spectral_mix(t, x, offset, width, modes);
  const Var bypass = dense(t, x, offset + 2 * modes * c2, width, width);
  return add(t, spec, bypass);
}

Var pde_gradient(Tape& t, Var theta, const PdeProblem& problem) {
  const Matrix& th = t.value(theta);
  if (th.cols() != 1 || th.rows() != problem.size())
    raise(ErrorKind::ShapeMismatch, "pde_gradient: theta must be N x 1");
  const Vector theta_v = th.col(0);
  LossAndGrad lg = problem.loss_and_grad(theta_v);
  if (!lg.grad.allFinite()) raise(ErrorKind::Diverged, "non-finite PDE gradient");
  return t.record(Matrix(lg.grad), t.needs_grad(theta),
                  [theta, theta_v, &problem](Tape& tp, const Matrix& g) {
                    // d/dtheta <g, grad L> = H g (H symmetric)
                    tp.accumulate(theta, Matrix(problem.hessian_vector(theta_v, g.col(0))));
                  });
}

Var smooth_l1_mean(Tape& t, Var pred, const Vector& target, double delta) {
  const Matrix& pv = t.value(pred);
  if (pv.cols() != 1 || pv.rows() != target.size())
    raise(ErrorKind::ShapeMismatch, "smooth_l1: prediction and target sizes differ");
  if (!(delta > 0.0)) raise(ErrorKind::InvalidSpec, "smooth_l1 delta must be positive");
  const Eigen::Index n = target.size();
  double s = 0.0;
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = pv(i, 0) - target[i];
    if (std::abs(e) < delta) {
      s += 0.5 * e * e / delta;
      d[i] = e / delta;
    } else {
      s += std::abs(e) - 0.5 * delta;
      d[i] = e > 0 ? 1.0 : -1.0;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (!std::isfinite(s)) raise(ErrorKind::Diverged, "non-finite data loss");
  return t.record(Matrix::Constant(1, 1, s * inv_n), t.needs_grad(pred),
                  [pred, d, inv_n](Tape& tp, const Matrix& g) {
                    tp.accumulate(pred, Matrix(d * (g(0, 0) * inv_n)));
                  });
}

}  // namespace physopt::nnet
