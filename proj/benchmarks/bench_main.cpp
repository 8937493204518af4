// Micro-benchmarks for the hot paths: basis evaluation, PDE gradients,
// conditioner forward/backward through the unrolled solve, Jacobi.

#include <benchmark/benchmark.h>

#include "physopt/basis.hpp"
#include "physopt/dataset.hpp"
#include "physopt/rng.hpp"
#include "physopt/solver.hpp"
#include "physopt/theory.hpp"

using namespace physopt;

namespace {

PreparedInstance poisson_instance(int n_terms) {
  Rng rng(1);
  const PdeInstance inst = sample_instance(Family::Poisson1d, rng);
  const auto basis = evaluate_solver_basis(default_basis_spec(Family::Poisson1d, n_terms), inst.grid);
  return prepare_instance(inst, basis, nnet::InputSpec{});
}

void BM_EvalBasis(benchmark::State& state) {
  BasisSpec spec;
  spec.n_terms = static_cast<int>(state.range(0));
  const Vector x = Vector::LinSpaced(256, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_basis(spec, x));
}
BENCHMARK(BM_EvalBasis)->Arg(16)->Arg(32)->Arg(64);

void BM_PdeGradient(benchmark::State& state) {
  Rng rng(2);
  const Family fam = static_cast<Family>(state.range(0));
  const PdeInstance inst = sample_instance(fam, rng);
  const auto basis = evaluate_solver_basis(default_basis_spec(fam), inst.grid);
  const PdeProblem prob(inst, basis, default_loss_config(inst));
  Vector theta(prob.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.1 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(prob.loss_and_grad(theta));
  state.SetLabel(std::string(family_name(fam)));
}
BENCHMARK(BM_PdeGradient)->DenseRange(0, 2);

void BM_ConditionerForward(benchmark::State& state) {
  const PreparedInstance p = poisson_instance(32);
  const auto net = nnet::make_fno_conditioner(Family::Poisson1d, 32, {}, {}, 0);
  const Vector g = p.problem->loss_and_grad(Vector::Zero(32)).grad;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(g, p.context));
}
BENCHMARK(BM_ConditionerForward);

void BM_UnrolledBackward(benchmark::State& state) {
  const PreparedInstance p = poisson_instance(32);
  const auto net = nnet::make_fno_conditioner(Family::Poisson1d, 32, {}, {}, 0);
  SolverConfig scfg;
  scfg.steps = static_cast<int>(state.range(0));
  const Vector target = solve_reference(p.problem->instance(), default_grid(Family::Poisson1d)).values;
  for (auto _ : state)
    benchmark::DoNotOptimize(unrolled_data_loss(net, p, target, scfg, Vector::Zero(32), 1.0, true));
}
BENCHMARK(BM_UnrolledBackward)->Arg(1)->Arg(2)->Arg(5);

void BM_JacobiEigen(benchmark::State& state) {
  const LinearSystem sys = fourier_poisson_system(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigen(sys.A));
  state.SetLabel("n=" + std::to_string(sys.A.rows()));
}
BENCHMARK(BM_JacobiEigen)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
