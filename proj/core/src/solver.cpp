// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "physopt/error.hpp"
#include "physopt/optim.hpp"
#include "physopt/parallel.hpp"
#include "physopt/rng.hpp"

namespace physopt {

using nnet::ConditionerNet;
using nnet::Tape;
using nnet::Var;

SolverBasisSpec default_basis_spec(Family family, int n_terms) {
  SolverBasisSpec s;
  if (family == Family::Nlrd1dt) {
    s.x.n_terms = 16;
    s.t.n_terms = 8;
  } else {
    s.x.n_terms = n_terms;
  }
  return s;
}

std::shared_ptr<const BasisEval> evaluate_solver_basis(const SolverBasisSpec& spec,
                                                       const Matrix& grid) {
  if (grid.cols() == 1) return std::make_shared<BasisEval>(eval_basis(spec.x, grid.col(0)));
  return std::make_shared<BasisEval>(tensor_basis(spec.x, spec.t, grid, spec.layout));
}

PreparedInstance prepare_instance(const PdeInstance& inst, std::shared_ptr<const BasisEval> basis,
                                  const nnet::InputSpec& input, double lambda_bc) {
  PreparedInstance p;
  auto problem = std::make_shared<PdeProblem>(inst, std::move(basis),
                                              default_loss_config(inst, lambda_bc));
  p.context = nnet::context_features(input, *problem);
  p.problem = std::move(problem);
  return p;
}

Vector initial_theta(const SolverConfig& scfg, int n, std::uint64_t instance_key) {
  if (scfg.theta0 == Theta0Init::Zeros) return Vector::Zero(n);
  Rng rng(derive_seed(scfg.theta0_seed, {0x7468657461ULL, instance_key}));
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scfg.theta0_sigma * rng.normal();
  return v;
}

namespace {

void check_solver_config(const SolverConfig& scfg) {
  if (scfg.steps < 1) raise(ErrorKind::Config, "solver needs at least one step");
  if (!(scfg.eta > 0.0)) raise(ErrorKind::Config, "eta must be positive");
}

void check_compatible(const ConditionerNet& net, const PreparedInstance& inst) {
  if (net.basis_size != inst.problem->size())
    raise(ErrorKind::ShapeMismatch, "network built for N = " + std::to_string(net.basis_size) +
                                        ", basis has " + std::to_string(inst.problem->size()));
  if (net.family != inst.problem->instance().family && net.input.gamma)
    raise(ErrorKind::ShapeMismatch, "network trained for family '" +
                                        std::string(family_name(net.family)) + "'");
}

}  // namespace

InferResult infer(const ConditionerNet& net, const PreparedInstance& inst, const SolverConfig& scfg,
                  const Vector& theta0) {
  check_solver_config(scfg);
  check_compatible(net, inst);
  const PdeProblem& problem = *inst.problem;
  InferResult r;
  Vector theta = theta0;
  r.iterates.push_back(theta);
  r.trace.push_back(problem.loss(theta));
  for (int l = 0; l < scfg.steps; ++l) {
    try {
      const Vector g = problem.loss_and_grad(theta).grad;
      const Vector dir = net.forward(g, inst.context);
      if (scfg.update_rule == UpdateRule::GdUpdate) theta = theta - scfg.eta * dir;
      else theta = dir;
      if (!theta.allFinite()) raise(ErrorKind::Diverged, "non-finite coefficients");
      r.trace.push_back(problem.loss(theta));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Diverged)
        raise(ErrorKind::Diverged, "solver step " + std::to_string(l + 1) + ": " + e.detail());
      throw;
    }
    r.iterates.push_back(theta);
  }
  r.theta = theta;
  return r;
}

InferResult infer(const ConditionerNet& net, const PreparedInstance& inst, const SolverConfig& scfg) {
  return infer(net, inst, scfg, initial_theta(scfg, inst.problem->size(), 0));
}

DataLossGrad unrolled_data_loss(const ConditionerNet& net, const PreparedInstance& inst,
                                const Vector& target, const SolverConfig& scfg,
                                const Vector& theta0, double delta, bool want_grad) {
  check_solver_config(scfg);
  check_compatible(net, inst);
  const PdeProblem& problem = *inst.problem;
  Tape t(net.weights);
  Var theta = want_grad ? t.leaf(Matrix(theta0)) : t.constant(Matrix(theta0));
  for (int l = 0; l < scfg.steps; ++l) {
    const Var g = nnet::pde_gradient(t, theta, problem);
    const Var dir = net.forward(t, g, inst.context);
    theta = scfg.update_rule == UpdateRule::GdUpdate ? nnet::sub(t, theta, nnet::scale(t, dir, scfg.eta))
                                                     : dir;
  }
  const Var u = nnet::matmul_const(t, problem.basis().values, theta);
  const Var loss = nnet::smooth_l1_mean(t, u, target, delta);
  DataLossGrad out;
  out.loss = t.value(loss)(0, 0);
  if (want_grad) {
    t.backward(loss);
    out.d_rho = t.param_grad();
    out.d_theta0 = t.adjoint(Var{0}).size() ? Vector(t.adjoint(Var{0}).col(0))
                                            : Vector::Zero(theta0.size());
  }
  return out;
}

double relative_mse(const Vector& pred, const Vector& ref) {
  if (pred.size() != ref.size()) raise(ErrorKind::ShapeMismatch, "prediction and reference differ in size");
  const double denom = ref.squaredNorm();
  if (denom == 0.0) raise(ErrorKind::UndefinedMetric, "reference field is identically zero");
  return (pred - ref).squaredNorm() / denom;
}

double relative_mse(const SolutionField& pred, const SolutionField& ref) {
  if (pred.nx != ref.nx || pred.nt != ref.nt) raise(ErrorKind::ShapeMismatch, "grids are not aligned");
  return relative_mse(pred.values, ref.values);
}

EvalSummary evaluate(const ConditionerNet& net, const std::vector<PreparedInstance>& insts,
                     const std::vector<Vector>& refs, const SolverConfig& scfg) {
  EvalSummary s;
  s.per_instance.assign(insts.size(), 0.0);
  parallel_for(insts.size(), [&](std::size_t i) {
    try {
      const Vector theta0 = initial_theta(scfg, insts[i].problem->size(), i);
      const InferResult r = infer(net, insts[i], scfg, theta0);
      s.per_instance[i] = relative_mse(insts[i].problem->reconstruct(r.theta), refs[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Diverged) throw;
      s.per_instance[i] = std::numeric_limits<double>::infinity();
    }
  });
  if (!insts.empty()) {
    s.mean = std::accumulate(s.per_instance.begin(), s.per_instance.end(), 0.0) /
             static_cast<double>(insts.size());
    std::vector<double> sorted = s.per_instance;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    s.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  return s;
}

TrainSet prepare_dataset(const Dataset& ds, std::shared_ptr<const BasisEval> basis,
                         const nnet::InputSpec& input, double lambda_bc) {
  TrainSet out;
  for (const auto& r : ds.train) {
    out.train.push_back(prepare_instance(r.instance, basis, input, lambda_bc));
    out.train_ref.push_back(r.solution.values);
  }
  for (const auto& r : ds.test) {
    out.test.push_back(prepare_instance(r.instance, basis, input, lambda_bc));
    out.test_ref.push_back(r.solution.values);
  }
  return out;
}

TrainResult train(const TrainSet& data, const ConditionerNet& net0, const SolverConfig& scfg,
                  const TrainConfig& tcfg, const EpochCallback& on_eval) {
  check_solver_config(scfg);
  if (tcfg.epochs < 0 || tcfg.batch_size < 1 || !(tcfg.lr > 0.0) || !(tcfg.lr_decay > 0.0) ||
      tcfg.eval_every < 1)
    raise(ErrorKind::Config, "invalid training configuration");
  TrainResult res;
  res.net = net0;
  if (tcfg.epochs == 0) return res;
  const std::size_t n_train = data.train.size();
  if (n_train == 0) raise(ErrorKind::Config, "empty training set");
  for (const auto& p : data.train) check_compatible(net0, p);

  std::vector<Vector> theta0(n_train);
  for (std::size_t i = 0; i < n_train; ++i)
    theta0[i] = initial_theta(scfg, data.train[i].problem->size(), i);

  Adam adam(AdamConfig{tcfg.lr});
  Rng shuffle_rng(derive_seed(tcfg.seed, {0x73687566ULL}));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t np = res.net.weights.size();

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    const double lr = exponential_decay(tcfg.lr, tcfg.lr_decay, epoch);
    adam.set_lr(lr);
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t start = 0; start < n_train; start += tcfg.batch_size) {
      const std::size_t bs = std::min<std::size_t>(tcfg.batch_size, n_train - start);
      std::vector<DataLossGrad> parts(bs);
      std::vector<char> ok(bs, 1);
      std::vector<std::string> why(bs);
      parallel_for(bs, [&](std::size_t k) {
        const std::size_t idx = order[start + k];
        try {
          parts[k] = unrolled_data_loss(res.net, data.train[idx], data.train_ref[idx], scfg,
                                        theta0[idx], tcfg.smooth_l1_delta, true);
          for (double g : parts[k].d_rho)
            if (!std::isfinite(g)) raise(ErrorKind::Diverged, "non-finite parameter gradient");
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Diverged) throw;
          ok[k] = 0;
          why[k] = e.detail();
        }
      });
      std::size_t good = 0;
      for (char o : ok) good += o ? 1 : 0;
      res.diverged_instances += static_cast<int>(bs - good);
      if (2 * good < bs) {
        std::string first;
        for (std::size_t k = 0; k < bs && first.empty(); ++k)
          if (!ok[k]) first = "instance " + std::to_string(order[start + k]) + ": " + why[k];
        raise(ErrorKind::Diverged, "epoch " + std::to_string(epoch) + ": " +
                                       std::to_string(bs - good) + "/" + std::to_string(bs) +
                                       " batch members diverged (" + first + ")");
      }
      std::vector<double> grad(np, 0.0);
      for (std::size_t k = 0; k < bs; ++k) {
        if (!ok[k]) continue;
        for (std::size_t j = 0; j < np; ++j) grad[j] += parts[k].d_rho[j];
      }
      const double inv = 1.0 / static_cast<double>(good);
      for (double& g : grad) g *= inv;
      adam.step(res.net.weights, grad);
    }
    if ((epoch + 1) % tcfg.eval_every == 0 || epoch + 1 == tcfg.epochs) {
      HistoryRow row;
      row.epoch = epoch + 1;
      row.lr = lr;
      row.train_rel_mse = evaluate(res.net, data.train, data.train_ref, scfg).mean;
      row.test_rel_mse = data.test.empty()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : evaluate(res.net, data.test, data.test_ref, scfg).mean;
      res.history.push_back(row);
      if (on_eval) on_eval(row);
    }
  }
  return res;
}

TrainResult train(const Dataset& ds, const ConditionerNet& net0, const BasisEval& basis,
                  const SolverConfig& scfg, const TrainConfig& tcfg) {
  const auto b = std::make_shared<BasisEval>(basis);
  return train(prepare_dataset(ds, b, net0.input), net0, scfg, tcfg);
}

}  // namespace physopt
