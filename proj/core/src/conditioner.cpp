// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/nnet/conditioner.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "physopt/error.hpp"
#include "physopt/rng.hpp"

namespace physopt::nnet {
namespace {

constexpr double kRmsFloor = 1e-12;
constexpr double kLogScale = 5.0;
constexpr double kForcingScale = 50.0;

int gamma_count(Family family) {
  return family == Family::Poisson1d ? kPoissonModes : (family == Family::Nlrd1dt ? 2 : 1);
}

Vector project_onto_basis(const Matrix& psi, const Vector& values) {
  return psi.completeOrthogonalDecomposition().solve(values);
}

}  // namespace

std::size_t layer_param_count(const LayerDesc& d) {
  switch (d.kind) {
    case LayerKind::Dense: return static_cast<std::size_t>(d.in) * d.out + d.out;
    case LayerKind::SpectralConv1d: return spectral_conv_param_count(d.width, d.modes);
    default: return 0;
  }
}

int gradient_channels(const InputSpec& spec) {
  if (!spec.gradient) return 0;
  return spec.encoding == GradientEncoding::Normalized ? 2 : 1;
}

int context_channels(const InputSpec& spec, Family family) {
  int c = 0;
  if (spec.gamma) c += gamma_count(family) * (1 + 2 * spec.gamma_frequencies);
  if (spec.bc) c += family == Family::Nlrd1dt ? 1 : 2;
  if (spec.forcing && family == Family::Poisson1d) c += 1;
  if (spec.position) c += 1;
  return c;
}

int input_channels(const InputSpec& spec, Family family) {
  return gradient_channels(spec) + context_channels(spec, family);
}

Matrix context_features(const InputSpec& spec, const PdeProblem& problem) {
  const PdeInstance& inst = problem.instance();
  const int n = problem.size();
  Matrix ctx(n, context_channels(spec, inst.family));
  int c = 0;
  auto broadcast = [&](double v) { ctx.col(c++).setConstant(v); };
  if (spec.gamma) {
    const int first = c;
    if (const auto* p = std::get_if<PoissonParams>(&inst.params)) {
      for (double a : p->a) broadcast(a / 100.0);
    } else if (const auto* h = std::get_if<HelmholtzParams>(&inst.params)) {
      broadcast(h->omega / 50.0);
    } else {
      const auto& q = std::get<NlrdParams>(inst.params);
      broadcast((q.nu - 3.0) / 2.0);
      broadcast(q.rho / 5.0);
    }
    const int last = c;
    for (int k = 1; k <= spec.gamma_frequencies; ++k)
      for (int g = first; g < last; ++g) {
        const double v = std::numbers::pi * k * ctx(0, g);
        broadcast(std::sin(v));
        broadcast(std::cos(v));
      }
  }
  if (spec.bc) {
    if (inst.family == Family::Nlrd1dt) {
      // Least-squares fit of the initial profile on the t = 0 rows.
      const BasisEval& b = problem.basis();
      Matrix psi(inst.conditions.size(), n);
      Vector g(inst.conditions.size());
      for (std::size_t k = 0; k < inst.conditions.size(); ++k) {
        psi.row(k) = b.values.row(inst.conditions[k].row);
        g[k] = inst.conditions[k].target;
      }
      ctx.col(c++) = project_onto_basis(psi, g);
    } else {
      double u0 = 0.0, v0 = 0.0;
      for (const auto& cond : inst.conditions) {
        if (cond.order == 0) u0 = cond.target;
        else v0 = cond.target;
      }
      broadcast(u0);
      broadcast(v0);
    }
  }
  if (spec.forcing && inst.family == Family::Poisson1d)
    ctx.col(c++) = project_onto_basis(problem.basis().values, inst.forcing) / kForcingScale;
  if (spec.position) {
    for (int i = 0; i < n; ++i) ctx(i, c) = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    ++c;
  }
  return ctx;
}

Var encode_gradient(Tape& t, Var grad, const InputSpec& spec) {
  const Matrix& g = t.value(grad);
  if (g.cols() != 1) raise(ErrorKind::ShapeMismatch, "gradient must be N x 1");
  if (!g.allFinite()) raise(ErrorKind::Diverged, "non-finite gradient fed to the conditioner");
  if (spec.encoding == GradientEncoding::Scaled) return scale(t, grad, 1.0 / spec.gradient_scale);
  const double n = static_cast<double>(g.rows());
  const double r = std::sqrt(g.squaredNorm() / n + kRmsFloor * kRmsFloor);
  Matrix out(g.rows(), 2);
  out.col(0) = g.col(0) / r;
  out.col(1).setConstant(std::log10(r) / kLogScale);
  const Vector gv = g.col(0);
  return t.record(std::move(out), t.needs_grad(grad), [grad, gv, r, n](Tape& tp, const Matrix& a) {
    // dr/dg = g / (n r)
    const Vector a0 = a.col(0);
    const double s_log = a.col(1).sum() / (kLogScale * std::numbers::ln10 * r);
    const double coef = -gv.dot(a0) / (n * r * r * r) + s_log / (n * r);
    tp.accumulate(grad, Matrix(a0 / r + coef * gv));
  });
}

std::vector<std::size_t> ConditionerNet::layer_offsets() const {
  std::vector<std::size_t> off;
  std::size_t o = 0;
  for (const auto& l : layers) {
    off.push_back(o);
    o += layer_param_count(l);
  }
  return off;
}

Var ConditionerNet::apply(Tape& t, Var features) const {
  Var x = features;
  std::size_t offset = 0;
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::Dense: x = dense(t, x, offset, l.in, l.out); break;
      case LayerKind::Gelu: x = gelu(t, x); break;
      case LayerKind::SpectralConv1d: x = spectral_conv(t, x, offset, l.width, l.modes); break;
      case LayerKind::Flatten: x = reshape(t, x, 1, static_cast<int>(t.value(x).size())); break;
      case LayerKind::Unflatten: x = reshape(t, x, static_cast<int>(t.value(x).size()), 1); break;
    }
    offset += layer_param_count(l);
  }
  const Matrix& out = t.value(x);
  if (out.rows() != basis_size || out.cols() != 1)
    raise(ErrorKind::ShapeMismatch, "conditioner output is " + std::to_string(out.rows()) + "x" +
                                        std::to_string(out.cols()) + ", expected " +
                                        std::to_string(basis_size) + "x1");
  return x;
}

Var ConditionerNet::forward(Tape& t, Var grad, const Matrix& context) const {
  if (t.value(grad).rows() != basis_size)
    raise(ErrorKind::ShapeMismatch, "gradient length differs from the basis size");
  std::vector<Var> parts;
  if (input.gradient) parts.push_back(encode_gradient(t, grad, input));
  if (context.cols() > 0) {
    if (context.rows() != basis_size) raise(ErrorKind::ShapeMismatch, "context rows differ from N");
    parts.push_back(t.constant(context));
  }
  if (parts.empty()) raise(ErrorKind::InvalidSpec, "conditioner has no inputs");
  const Var features = parts.size() == 1 ? parts[0] : concat_cols(t, parts);
  return apply(t, features);
}

Vector ConditionerNet::forward(const Vector& grad, const Matrix& context) const {
  Tape t(weights);
  const Var out = forward(t, t.constant(Matrix(grad)), context);
  return t.value(out).col(0);
}

void initialize(ConditionerNet& net) {
  // Shape check by symbolic propagation of (rows, cols).
  int rows = net.basis_size;
  int cols = input_channels(net.input, net.family);
  std::size_t total = 0;
  for (const auto& l : net.layers) {
    switch (l.kind) {
      case LayerKind::Dense:
        if (l.in != cols) raise(ErrorKind::ShapeMismatch, "dense layer input width mismatch");
        cols = l.out;
        break;
      case LayerKind::SpectralConv1d:
        if (l.width != cols) raise(ErrorKind::ShapeMismatch, "spectral layer width mismatch");
        if (l.modes < 1 || l.modes > rows / 2 + 1)
          raise(ErrorKind::InvalidSpec, "spectral modes must be in [1, N/2+1]");
        break;
      case LayerKind::Flatten:
        cols = rows * cols;
        rows = 1;
        break;
      case LayerKind::Unflatten:
        rows = rows * cols;
        cols = 1;
        break;
      case LayerKind::Gelu: break;
    }
    total += layer_param_count(l);
  }
  if (rows != net.basis_size || cols != 1)
    raise(ErrorKind::ShapeMismatch, "network does not map to an N x 1 output");
  net.weights.assign(total, 0.0);
  Rng rng(derive_seed(net.seed, {0x696e6974ULL}));
  std::size_t off = 0;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::Dense) {
      const double a = std::sqrt(6.0 / (l.in + l.out));
      for (int k = 0; k < l.in * l.out; ++k) net.weights[off + k] = rng.uniform(-a, a);
    } else if (l.kind == LayerKind::SpectralConv1d) {
      const double s = 1.0 / (static_cast<double>(l.width) * l.width);
      const std::size_t nspec = 2 * static_cast<std::size_t>(l.modes) * l.width * l.width;
      for (std::size_t k = 0; k < nspec; ++k) net.weights[off + k] = s * rng.uniform();
      const double a = std::sqrt(6.0 / (2.0 * l.width));
      for (int k = 0; k < l.width * l.width; ++k) net.weights[off + nspec + k] = rng.uniform(-a, a);
    }
    off += layer_param_count(l);
  }
}

ConditionerNet make_fno_conditioner(Family family, int basis_size, const InputSpec& input,
                                    const FnoOptions& opts, std::uint64_t seed) {
  if (opts.blocks < 1) raise(ErrorKind::InvalidSpec, "FNO needs at least one block");
  ConditionerNet net;
  net.family = family;
  net.basis_size = basis_size;
  net.input = input;
  net.seed = seed;
  net.layers.push_back(LayerDesc::dense(input_channels(input, family), opts.width));
  for (int b = 0; b < opts.blocks; ++b) {
    net.layers.push_back(LayerDesc::spectral(opts.width, opts.modes));
    if (b + 1 < opts.blocks) net.layers.push_back(LayerDesc::gelu());
  }
  net.layers.push_back(LayerDesc::dense(opts.width, opts.fc));
  net.layers.push_back(LayerDesc::gelu());
  net.layers.push_back(LayerDesc::dense(opts.fc, 1));
  initialize(net);
  return net;
}

ConditionerNet make_mlp_conditioner(Family family, int basis_size, const InputSpec& input,
                                    const MlpOptions& opts, std::uint64_t seed) {
  ConditionerNet net;
  net.family = family;
  net.basis_size = basis_size;
  net.input = input;
  net.seed = seed;
  net.layers.push_back(LayerDesc::flatten());
  int in = basis_size * input_channels(input, family);
  for (int d = 0; d < opts.depth; ++d) {
    net.layers.push_back(LayerDesc::dense(in, opts.hidden));
    net.layers.push_back(LayerDesc::gelu());
    in = opts.hidden;
  }
  net.layers.push_back(LayerDesc::dense(in, basis_size));
  net.layers.push_back(LayerDesc::unflatten());
  initialize(net);
  return net;
}

ConditionerNet make_identity_conditioner(Family family, int basis_size) {
  ConditionerNet net;
  net.family = family;
  net.basis_size = basis_size;
  net.input = InputSpec{true, false, false, false, false, GradientEncoding::Scaled, 1.0};
  net.layers = {LayerDesc::dense(1, 1)};
  net.weights = {1.0, 0.0};
  return net;
}

void zero_output_layer(ConditionerNet& net) {
  const auto offsets = net.layer_offsets();
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    if (net.layers[i].kind == LayerKind::Dense) {
      const std::size_t n = layer_param_count(net.layers[i]);
      std::fill_n(net.weights.begin() + static_cast<std::ptrdiff_t>(offsets[i]), n, 0.0);
      return;
    }
  }
  raise(ErrorKind::InvalidSpec, "network has no dense layer");
}

}  // namespace physopt::nnet
