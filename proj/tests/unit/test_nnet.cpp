// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "physopt/dataset.hpp"
#include "physopt/error.hpp"
#include "physopt/nnet/conditioner.hpp"
#include "physopt/nnet/dft.hpp"
#include "physopt/nnet/tape.hpp"
#include "physopt/rng.hpp"
#include "physopt/solver.hpp"

using namespace physopt;
using namespace physopt::nnet;

namespace {

using Cplx = std::complex<double>;

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

std::vector<double> random_params(Rng& rng, std::size_t n, double s = 0.3) {
  std::vector<double> p(n);
  for (double& v : p) v = s * rng.normal();
  return p;
}

// Scalar objective <W, f(x; params)> and its gradients through the tape.
using Builder = std::function<Var(Tape&, Var)>;

struct TapeGrads {
  double value;
  Matrix dx;
  std::vector<double> dp;
};

TapeGrads run(const Builder& f, const Matrix& x, const std::vector<double>& params,
              const Matrix& w) {
  Tape t(params);
  const Var in = t.leaf(x);
  const Var out = f(t, in);
  const Var prod = [&] {
    const Matrix& ov = t.value(out);
    const Matrix wcopy = w;
    return t.record(Matrix::Constant(1, 1, ov.cwiseProduct(wcopy).sum()), true,
                    [out, wcopy](Tape& tp, const Matrix& g) { tp.accumulate(out, wcopy * g(0, 0)); });
  }();
  t.backward(prod);
  return {t.value(prod)(0, 0), t.adjoint(in), t.param_grad()};
}

void check_gradients(const Builder& f, const Matrix& x, std::vector<double> params, Rng& rng,
                     double tol = 1e-7) {
  Tape probe(params);
  const Matrix w = random_matrix(rng, static_cast<int>(probe.value(f(probe, probe.leaf(x))).rows()),
                                 static_cast<int>(probe.value(f(probe, probe.leaf(x))).cols()));
  const TapeGrads g = run(f, x, params, w);
  const double h = 1e-6;
  // Inputs.
  Matrix fdx(x.rows(), x.cols());
  for (int i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    fdx.data()[i] = (run(f, xp, params, w).value - run(f, xm, params, w).value) / (2 * h);
  }
  EXPECT_LT((fdx - g.dx).norm(), tol * std::max(1.0, g.dx.norm()));
  // Parameters.
  Vector fdp(static_cast<Eigen::Index>(params.size())), ap(fdp.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double keep = params[k];
    params[k] = keep + h;
    const double fp = run(f, x, params, w).value;
    params[k] = keep - h;
    const double fm = run(f, x, params, w).value;
    params[k] = keep;
    fdp[static_cast<Eigen::Index>(k)] = (fp - fm) / (2 * h);
    ap[static_cast<Eigen::Index>(k)] = g.dp[k];
  }
  if (!params.empty()) EXPECT_LT((fdp - ap).norm(), tol * std::max(1.0, ap.norm()));
}

}  // namespace

TEST(Dft, ConstantConcentratesAtZero) {
  for (int n : {8, 12, 32}) {
    const ComplexVector X = dft_1d(Vector(Vector::Constant(n, 2.5)));
    EXPECT_NEAR(X[0].real(), 2.5 * std::sqrt(double(n)), 1e-12);
    for (int k = 1; k < n; ++k) EXPECT_LT(std::abs(X[k]), 1e-12);
  }
}

TEST(Dft, ImpulseIsFlat) {
  Vector e = Vector::Zero(16);
  e[0] = 1.0;
  const ComplexVector X = dft_1d(e);
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(std::abs(X[k]), 0.25, 1e-15);
}

TEST(Dft, MatchesNaiveOracle) {
  Rng rng(1);
  for (int n : {32, 24, 7, 1}) {
    std::vector<Cplx> x(n);
    ComplexVector xv(n);
    for (int j = 0; j < n; ++j) xv[j] = x[j] = Cplx(rng.normal(), rng.normal());
    const auto ref = oracle::naive_dft(x);
    const ComplexVector X = dft_1d(xv);
    for (int k = 0; k < n; ++k) EXPECT_LT(std::abs(X[k] - ref[k]), 1e-10);
    const ComplexVector back = idft_1d(X);
    for (int j = 0; j < n; ++j) EXPECT_LT(std::abs(back[j] - x[j]), 1e-12);
  }
}

TEST(Dft, TruncatedTransformRoundTripsBandLimitedSignals) {
  const int n = 32, modes = 6;
  const TruncatedRealDft& F = truncated_real_dft(n, modes);
  Vector x(n);
  for (int j = 0; j < n; ++j)
    x[j] = 0.3 + std::cos(2 * std::numbers::pi * 2 * j / n) - 0.7 * std::sin(2 * std::numbers::pi * 5 * j / n);
  const Vector back = F.inv_re * (F.fwd_re * x) + F.inv_im * (F.fwd_im * x);
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-12);
  const ComplexVector X = dft_1d(x);
  for (int k = 0; k < modes; ++k) {
    EXPECT_NEAR((F.fwd_re * x)[k], X[k].real(), 1e-12);
    EXPECT_NEAR((F.fwd_im * x)[k], X[k].imag(), 1e-12);
  }
  EXPECT_THROW(truncated_real_dft(8, 6), Error);
}

TEST(Spectral, SingleModeKeepsOnlyTheMean) {
  const int n = 32;
  Rng rng(2);
  for (int k : {1, 3, 7}) {
    Matrix x(n, 1);
    std::vector<Cplx> xc(n);
    for (int j = 0; j < n; ++j) {
      x(j, 0) = 0.8 + std::sin(2 * std::numbers::pi * k * j / n);
      xc[j] = x(j, 0);
    }
    const double w_re = rng.normal(), w_im = rng.normal();
    std::vector<double> params{w_re, w_im};
    Tape t(params);
    const Matrix y = t.value(spectral_mix(t, t.constant(x), 0, 1, 1));
    // Oracle: scale the zero frequency, drop the rest, invert.
    const Cplx dc = oracle::naive_dft(xc)[0] * Cplx(w_re, w_im);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(y(j, 0), dc.real() / std::sqrt(double(n)), 1e-12);
  }
}

TEST(Spectral, LinearInInput) {
  Rng rng(3);
  const int n = 16, w = 3, modes = 4;
  const auto params = random_params(rng, spectral_conv_param_count(w, modes));
  const Matrix x = random_matrix(rng, n, w);
  Tape t(params);
  const Matrix y1 = t.value(spectral_mix(t, t.constant(x), 0, w, modes));
  const Matrix y2 = t.value(spectral_mix(t, t.constant(-2.5 * x), 0, w, modes));
  EXPECT_LT((y2 + 2.5 * y1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TapeOps, DenseQuadraticClosedForm) {
  // f = 0.5 ||x W + b||^2 with x 1 x 2, W 2 x 1.
  const std::vector<double> p{0.5, -1.0, 0.25};
  Tape t(p);
  Matrix x(1, 2);
  x << 2.0, 3.0;
  const Var in = t.leaf(x);
  const Var y = dense(t, in, 0, 2, 1);
  const double yv = t.value(y)(0, 0);
  EXPECT_DOUBLE_EQ(yv, 2.0 * 0.5 - 3.0 + 0.25);
  const Var loss = t.record(Matrix::Constant(1, 1, 0.5 * yv * yv), true,
                            [y, yv](Tape& tp, const Matrix& g) {
                              tp.accumulate(y, Matrix::Constant(1, 1, yv * g(0, 0)));
                            });
  t.backward(loss);
  EXPECT_DOUBLE_EQ(t.param_grad()[0], yv * 2.0);
  EXPECT_DOUBLE_EQ(t.param_grad()[1], yv * 3.0);
  EXPECT_DOUBLE_EQ(t.param_grad()[2], yv);
  EXPECT_DOUBLE_EQ(t.adjoint(in)(0, 0), yv * 0.5);
  EXPECT_DOUBLE_EQ(t.adjoint(in)(0, 1), yv * -1.0);
}

TEST(TapeOps, ConstantOutputHasZeroGradient) {
  const std::vector<double> p{1.0, 2.0};
  Tape t(p);
  const Var c = t.constant(Matrix::Constant(1, 1, 4.0));
  t.backward(scale(t, c, 3.0));
  for (double g : t.param_grad()) EXPECT_EQ(g, 0.0);
}

TEST(TapeOps, FiniteDifferenceChecks) {
  Rng rng(4);
  const Matrix x = random_matrix(rng, 8, 3);
  check_gradients([](Tape& t, Var v) { return dense(t, v, 0, 3, 2); }, x, random_params(rng, 8), rng);
  check_gradients([](Tape& t, Var v) { return gelu(t, v); }, x, {}, rng);
  check_gradients([](Tape& t, Var v) { return spectral_conv(t, v, 0, 3, 3); }, x,
                  random_params(rng, spectral_conv_param_count(3, 3)), rng);
  check_gradients([](Tape& t, Var v) { return reshape(t, v, 4, 6); }, x, {}, rng);
  check_gradients(
      [](Tape& t, Var v) {
        return concat_cols(t, {v, scale(t, v, 2.0), sub(t, v, add(t, v, v))});
      },
      x, {}, rng);
  const Matrix target = random_matrix(rng, 8, 1);
  check_gradients(
      [target](Tape& t, Var v) {
        const Var y = matmul_const(t, Matrix::Ones(8, 8) * 0.1, v);
        return smooth_l1_mean(t, y, target.col(0), 1.0);
      },
      random_matrix(rng, 8, 1), {}, rng);
  for (GradientEncoding enc : {GradientEncoding::Normalized, GradientEncoding::Scaled}) {
    InputSpec spec;
    spec.encoding = enc;
    spec.gradient_scale = 7.0;
    check_gradients([spec](Tape& t, Var v) { return encode_gradient(t, v, spec); },
                    random_matrix(rng, 8, 1), {}, rng);
  }
}

TEST(TapeOps, AdjointsAreLinear) {
  Rng rng(5);
  const auto p = random_params(rng, spectral_conv_param_count(2, 2) + 3);
  const Matrix x = random_matrix(rng, 8, 2);
  const Matrix w1 = random_matrix(rng, 8, 1), w2 = random_matrix(rng, 8, 1);
  const Builder f = [](Tape& t, Var v) { return dense(t, gelu(t, spectral_conv(t, v, 0, 2, 2)),
                                                     spectral_conv_param_count(2, 2), 2, 1); };
  const double a = 0.7, b = -1.9;
  const TapeGrads g1 = run(f, x, p, w1), g2 = run(f, x, p, w2), g12 = run(f, x, p, a * w1 + b * w2);
  EXPECT_LT((g12.dx - (a * g1.dx + b * g2.dx)).norm(), 1e-12 * g12.dx.norm());
  for (std::size_t k = 0; k < p.size(); ++k)
    EXPECT_NEAR(g12.dp[k], a * g1.dp[k] + b * g2.dp[k], 1e-12 * (1 + std::abs(g12.dp[k])));
}

TEST(Conditioner, ParameterCountIsSumOfLayers) {
  InputSpec in;
  const ConditionerNet net = make_fno_conditioner(Family::Poisson1d, 32, in, FnoOptions{}, 1);
  std::size_t total = 0;
  for (const auto& l : net.layers) total += layer_param_count(l);
  EXPECT_EQ(net.param_count(), total);
  EXPECT_EQ(net.layers.front().in, 2 + 16 + 2 + 1 + 1);
  const std::size_t expect = (22 * 32 + 32) + 3 * (2 * 16 * 32 * 32 + 32 * 32 + 32) +
                             (32 * 64 + 64) + (64 + 1);
  EXPECT_EQ(total, expect);
}

TEST(Conditioner, ZeroOutputLayerGivesZero) {
  Rng rng(6);
  ConditionerNet net = make_fno_conditioner(Family::Helmholtz1d, 32, InputSpec{}, {8, 4, 3, 16}, 3);
  zero_output_layer(net);
  for (int k = 0; k < 3; ++k) {
    const Vector out = net.forward(random_matrix(rng, 32, 1).col(0) * 100.0,
                                   random_matrix(rng, 32, context_channels(net.input, net.family)));
    EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Conditioner, IdentityReturnsGradient) {
  const ConditionerNet net = make_identity_conditioner(Family::Poisson1d, 32);
  Rng rng(7);
  const Vector g = random_matrix(rng, 32, 1).col(0) * 1e3;
  EXPECT_EQ(net.forward(g, Matrix(32, 0)), g);
}

TEST(Conditioner, NonFiniteGradientIsDivergence) {
  const ConditionerNet net = make_fno_conditioner(Family::Poisson1d, 32, InputSpec{}, {8, 4, 1, 8}, 1);
  Vector g = Vector::Zero(32);
  g[3] = std::nan("");
  try {
    net.forward(g, Matrix::Zero(32, context_channels(net.input, net.family)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Diverged);
  }
}

TEST(Conditioner, ModesAboveNyquistRejected) {
  EXPECT_THROW(make_fno_conditioner(Family::Poisson1d, 32, InputSpec{}, {8, 18, 1, 8}, 1), Error);
  EXPECT_NO_THROW(make_fno_conditioner(Family::Poisson1d, 32, InputSpec{}, {8, 17, 1, 8}, 1));
}

TEST(Conditioner, DeterministicInitAndForward) {
  const auto a = make_fno_conditioner(Family::Nlrd1dt, 40, InputSpec{}, {8, 4, 2, 8}, 11);
  const auto b = make_fno_conditioner(Family::Nlrd1dt, 40, InputSpec{}, {8, 4, 2, 8}, 11);
  const auto c = make_fno_conditioner(Family::Nlrd1dt, 40, InputSpec{}, {8, 4, 2, 8}, 12);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_NE(a.weights, c.weights);
  const double bound = std::sqrt(6.0 / (a.layers[0].in + 8));
  for (int k = 0; k < a.layers[0].in * 8; ++k) EXPECT_LE(std::abs(a.weights[k]), bound);
}

TEST(Conditioner, MlpShapes) {
  const auto net = make_mlp_conditioner(Family::Helmholtz1d, 16, InputSpec{}, {32, 2}, 1);
  const Vector out = net.forward(Vector::Ones(16), Matrix::Zero(16, context_channels(net.input, net.family)));
  EXPECT_EQ(out.size(), 16);
  EXPECT_TRUE(out.allFinite());
}

TEST(Conditioner, GammaEmbeddingChannels) {
  Rng rng(12);
  const GridSpec grid = default_grid(Family::Helmholtz1d);
  const PdeInstance inst = sample_instance(Family::Helmholtz1d, rng, grid);
  const auto basis = evaluate_solver_basis(default_basis_spec(Family::Helmholtz1d, 12), inst.grid);
  const PdeProblem problem(inst, basis, default_loss_config(inst));
  InputSpec plain, embedded;
  plain.position = embedded.position = false;
  embedded.gamma_frequencies = 4;
  EXPECT_EQ(context_channels(embedded, Family::Helmholtz1d), context_channels(plain, Family::Helmholtz1d) + 8);
  EXPECT_EQ(context_channels(embedded, Family::Poisson1d), context_channels(plain, Family::Poisson1d) + 8 * 16);
  const Matrix a = context_features(plain, problem);
  const Matrix b = context_features(embedded, problem);
  const double g = std::get<HelmholtzParams>(inst.params).omega / 50.0;
  EXPECT_EQ(b(3, 0), a(3, 0));
  EXPECT_NEAR(b(3, 1), std::sin(std::numbers::pi * g), 1e-15);
  EXPECT_NEAR(b(3, 2), std::cos(std::numbers::pi * g), 1e-15);
  EXPECT_NEAR(b(3, 7), std::sin(4 * std::numbers::pi * g), 1e-15);
  EXPECT_EQ(b.rightCols(2), a.rightCols(2));
  InputSpec off = embedded;
  off.gamma = false;
  EXPECT_EQ(context_channels(off, Family::Helmholtz1d), 2);
}

TEST(Checkpoint, RoundTrip) {
  InputSpec in;
  in.forcing = false;
  in.encoding = GradientEncoding::Scaled;
  in.gradient_scale = 123.5;
  in.gamma_frequencies = 3;
  const auto net = make_fno_conditioner(Family::Poisson1d, 32, in, {8, 4, 2, 16}, 9);
  const std::string path =
      (std::filesystem::temp_directory_path() / "physopt_ckpt_test.bin").string();
  save_checkpoint(net, path);
  const ConditionerNet back = load_checkpoint(path);
  EXPECT_EQ(back.family, net.family);
  EXPECT_EQ(back.basis_size, net.basis_size);
  EXPECT_EQ(back.input, net.input);
  EXPECT_EQ(back.layers, net.layers);
  EXPECT_EQ(back.seed, net.seed);
  EXPECT_EQ(back.weights, net.weights);
  try {
    load_checkpoint(path + ".missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

namespace {

struct PipelineCase {
  Family family;
  int steps;
};

class UnrolledGradient : public ::testing::TestWithParam<PipelineCase> {};

}  // namespace

TEST_P(UnrolledGradient, MatchesFiniteDifferences) {
  const auto [family, steps] = GetParam();
  Rng rng(derive_seed(31, {static_cast<std::uint64_t>(family), static_cast<std::uint64_t>(steps)}));
  const GridSpec grid = default_grid(family);
  const PdeInstance inst = sample_instance(family, rng, grid);
  const Vector target = solve_reference(inst, grid).values;
  const auto basis = evaluate_solver_basis(default_basis_spec(family), inst.grid);
  InputSpec in;
  const PreparedInstance prep = prepare_instance(inst, basis, in);
  ConditionerNet net = make_fno_conditioner(family, basis->size(), in, {8, 6, 3, 16}, 5);
  SolverConfig scfg;
  scfg.steps = steps;
  const Vector theta0 = Vector::Zero(basis->size());
  const DataLossGrad g = unrolled_data_loss(net, prep, target, scfg, theta0, 1.0);
  ASSERT_EQ(g.d_rho.size(), net.param_count());
  std::vector<std::size_t> coords;
  for (int k = 0; k < 20; ++k) coords.push_back(rng.below(net.param_count()));
  Vector fd(20), an(20);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    ConditionerNet p = net, m = net;
    p.weights[coords[k]] += h;
    m.weights[coords[k]] -= h;
    fd[k] = (unrolled_data_loss(p, prep, target, scfg, theta0, 1.0, false).loss -
             unrolled_data_loss(m, prep, target, scfg, theta0, 1.0, false).loss) / (2 * h);
    an[k] = g.d_rho[coords[k]];
  }
  EXPECT_LT((fd - an).norm(), 1e-4 * an.norm()) << "fd " << fd.transpose() << "\nan " << an.transpose();
  EXPECT_GT(an.norm(), 0.0);
}

INSTANTIATE_TEST_SUITE_P(
    LinearFamilies, UnrolledGradient,
    ::testing::Values(PipelineCase{Family::Poisson1d, 1}, PipelineCase{Family::Poisson1d, 2},
                      PipelineCase{Family::Poisson1d, 3}, PipelineCase{Family::Helmholtz1d, 1},
                      PipelineCase{Family::Helmholtz1d, 2}, PipelineCase{Family::Helmholtz1d, 3},
                      PipelineCase{Family::Nlrd1dt, 2}));
