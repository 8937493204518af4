// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/nnet/tape.hpp"

#include <string>

#include "physopt/error.hpp"

namespace physopt::nnet {

Tape::Tape(std::span<const double> params) : params_(params), param_grad_(params.size(), 0.0) {}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::leaf(Matrix value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Matrix value, bool needs_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (g.rows() != n.value.rows() || g.cols() != n.value.cols())
    raise(ErrorKind::ShapeMismatch, "adjoint shape does not match node " + std::to_string(v.id));
  if (n.adjoint.size() == 0) n.adjoint = g;
  else n.adjoint += g;
}

void Tape::backward(Var root, double seed) {
  if (root.id < 0 || root.id >= static_cast<int>(nodes_.size()))
    raise(ErrorKind::ShapeMismatch, "root not on this tape");
  if (nodes_[root.id].value.size() != 1)
    raise(ErrorKind::ShapeMismatch, "backward root must be a scalar");
  for (auto& n : nodes_) n.adjoint.resize(0, 0);
  std::fill(param_grad_.begin(), param_grad_.end(), 0.0);
  if (!nodes_[root.id].needs_grad) return;
  nodes_[root.id].adjoint = Matrix::Constant(1, 1, seed);
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.adjoint.size() == 0 || !n.backward) continue;
    const Matrix adj = n.adjoint;
    n.backward(*this, adj);
  }
}

namespace {

void check_same_shape(const Tape& t, Var a, Var b, const char* op) {
  if (t.value(a).rows() != t.value(b).rows() || t.value(a).cols() != t.value(b).cols())
    raise(ErrorKind::ShapeMismatch, std::string(op) + ": operand shapes differ");
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "add");
  return t.record(t.value(a) + t.value(b), t.needs_grad(a) || t.needs_grad(b),
                  [a, b](Tape& tp, const Matrix& g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, g);
                  });
}

Var sub(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "sub");
  return t.record(t.value(a) - t.value(b), t.needs_grad(a) || t.needs_grad(b),
                  [a, b](Tape& tp, const Matrix& g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, -g);
                  });
}

Var scale(Tape& t, Var a, double s) {
  return t.record(s * t.value(a), t.needs_grad(a),
                  [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, s * g); });
}

Var matmul_const(Tape& t, const Matrix& m, Var x) {
  if (m.cols() != t.value(x).rows()) raise(ErrorKind::ShapeMismatch, "matmul: inner sizes differ");
  return t.record(m * t.value(x), t.needs_grad(x),
                  [m, x](Tape& tp, const Matrix& g) { tp.accumulate(x, m.transpose() * g); });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) raise(ErrorKind::ShapeMismatch, "concat of nothing");
  const Eigen::Index rows = t.value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (Var p : parts) {
    if (t.value(p).rows() != rows) raise(ErrorKind::ShapeMismatch, "concat: row counts differ");
    cols += t.value(p).cols();
    ng = ng || t.needs_grad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, t.value(p).cols()) = t.value(p);
    c += t.value(p).cols();
  }
  return t.record(std::move(out), ng, [parts](Tape& tp, const Matrix& g) {
    Eigen::Index c0 = 0;
    for (Var p : parts) {
      const Eigen::Index w = tp.value(p).cols();
      tp.accumulate(p, g.middleCols(c0, w));
      c0 += w;
    }
  });
}

Var reshape(Tape& t, Var x, int rows, int cols) {
  const Matrix& v = t.value(x);
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    raise(ErrorKind::ShapeMismatch, "reshape changes element count");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor src = v;
  Matrix out = Eigen::Map<const RowMajor>(src.data(), rows, cols);
  const Eigen::Index r0 = v.rows(), c0 = v.cols();
  return t.record(std::move(out), t.needs_grad(x), [x, r0, c0](Tape& tp, const Matrix& g) {
    const RowMajor gs = g;
    tp.accumulate(x, Matrix(Eigen::Map<const RowMajor>(gs.data(), r0, c0)));
  });
}

Var sum_scalars(Tape& t, const std::vector<Var>& parts) {
  double s = 0.0;
  bool ng = false;
  for (Var p : parts) {
    if (t.value(p).size() != 1) raise(ErrorKind::ShapeMismatch, "sum_scalars needs 1x1 inputs");
    s += t.value(p)(0, 0);
    ng = ng || t.needs_grad(p);
  }
  return t.record(Matrix::Constant(1, 1, s), ng, [parts](Tape& tp, const Matrix& g) {
    for (Var p : parts) tp.accumulate(p, g);
  });
}

}  // namespace physopt::nnet
