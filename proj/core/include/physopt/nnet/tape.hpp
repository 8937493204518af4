// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "physopt/types.hpp"

namespace physopt {
class PdeProblem;
}

namespace physopt::nnet {

struct Var {
  int id = -1;
};

// Records matrix-valued nodes of one forward pass. Backward replays the
// recorded vector-Jacobian products in reverse and accumulates adjoints of
// nodes and of the flat parameter vector the tape was created with.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_adjoint)>;

  explicit Tape(std::span<const double> params = {});

  Var constant(Matrix value);
  Var leaf(Matrix value);  // differentiable input
  Var record(Matrix value, bool needs_grad, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& adjoint(Var v) const { return nodes_[v.id].adjoint; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  std::span<const double> params() const { return params_; }
  const std::vector<double>& param_grad() const { return param_grad_; }
  double* param_grad_data() { return param_grad_.data(); }

  void accumulate(Var v, const Matrix& g);

  // Root must be 1 x 1; its adjoint is seeded with `seed`.
  void backward(Var root, double seed = 1.0);

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;
    bool needs_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::span<const double> params_;
  std::vector<double> param_grad_;
};

// Elementwise and structural ops.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var matmul_const(Tape& t, const Matrix& m, Var x);  // m * x
Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var reshape(Tape& t, Var x, int rows, int cols);   // row-major element order
Var sum_scalars(Tape& t, const std::vector<Var>& parts);

// Network layers. Parameters live in the tape's flat vector at `offset`.
// dense: x (r x in) -> x W + 1 b^T, W stored row-major in x out.
Var dense(Tape& t, Var x, std::size_t offset, int in, int out);
Var gelu(Tape& t, Var x);
// Spectral convolution over rows of x (n x width) keeping `modes`
// frequencies, plus a pointwise linear bypass with bias.
Var spectral_conv(Tape& t, Var x, std::size_t offset, int width, int modes);
std::size_t spectral_conv_param_count(int width, int modes);
// Spectral part only, no bypass (linear in x).
Var spectral_mix(Tape& t, Var x, std::size_t offset, int width, int modes);

double gelu_value(double x);

// Gradient of the physics-informed loss with respect to theta (n x 1).
// The backward pass uses Hessian-vector products of the loss.
Var pde_gradient(Tape& t, Var theta, const PdeProblem& problem);

// Mean smooth-L1 (Huber with transition delta, scaled by 1/delta below it)
// between pred (n x 1) and target; returns 1 x 1.
Var smooth_l1_mean(Tape& t, Var pred, const Vector& target, double delta);

}  // namespace physopt::nnet
