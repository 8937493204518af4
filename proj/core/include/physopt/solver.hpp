// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "physopt/dataset.hpp"
#include "physopt/nnet/conditioner.hpp"
#include "physopt/pde.hpp"

namespace physopt {

enum class Theta0Init { Zeros, GaussianSmall };
enum class UpdateRule { GdUpdate, Direct };

struct SolverConfig {
  int steps = 2;  // L
  double eta = 1.0;
  Theta0Init theta0 = Theta0Init::Zeros;
  double theta0_sigma = 0.1;
  std::uint64_t theta0_seed = 0;
  UpdateRule update_rule = UpdateRule::GdUpdate;
};

struct TrainConfig {
  int epochs = 750;
  int batch_size = 20;
  double lr = 1e-3;
  double lr_decay = 0.995;
  double smooth_l1_delta = 1.0;
  std::uint64_t seed = 0;
  int eval_every = 50;
};

// One instance ready for the solver: the loss problem plus the conditioner's
// constant input channels.
struct PreparedInstance {
  std::shared_ptr<const PdeProblem> problem;
  Matrix context;
};

PreparedInstance prepare_instance(const PdeInstance& inst, std::shared_ptr<const BasisEval> basis,
                                  const nnet::InputSpec& input, double lambda_bc = 1.0);

Vector initial_theta(const SolverConfig& scfg, int n, std::uint64_t instance_key);

struct InferResult {
  Vector theta;                 // Theta_L
  std::vector<double> trace;    // L_PDE at Theta_0 .. Theta_L
  std::vector<Vector> iterates; // Theta_0 .. Theta_L
};

// Runs L conditioner steps from theta0. Reads no reference data.
InferResult infer(const nnet::ConditionerNet& net, const PreparedInstance& inst,
                  const SolverConfig& scfg, const Vector& theta0);
InferResult infer(const nnet::ConditionerNet& net, const PreparedInstance& inst,
                  const SolverConfig& scfg);

// Smooth-L1 data loss after the unrolled solve and its exact gradients.
struct DataLossGrad {
  double loss = 0.0;
  std::vector<double> d_rho;
  Vector d_theta0;
};

DataLossGrad unrolled_data_loss(const nnet::ConditionerNet& net, const PreparedInstance& inst,
                                const Vector& target, const SolverConfig& scfg,
                                const Vector& theta0, double delta, bool want_grad = true);

double relative_mse(const Vector& pred, const Vector& ref);
double relative_mse(const SolutionField& pred, const SolutionField& ref);

struct HistoryRow {
  int epoch = 0;
  double train_rel_mse = 0.0;
  double test_rel_mse = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  nnet::ConditionerNet net;
  std::vector<HistoryRow> history;
  int diverged_instances = 0;
};

struct EvalSummary {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> per_instance;
};

// Relative MSE of the solver output against the references, per instance.
EvalSummary evaluate(const nnet::ConditionerNet& net, const std::vector<PreparedInstance>& insts,
                     const std::vector<Vector>& refs, const SolverConfig& scfg);

using EpochCallback = std::function<void(const HistoryRow&)>;

struct TrainSet {
  std::vector<PreparedInstance> train, test;
  std::vector<Vector> train_ref, test_ref;
};

TrainSet prepare_dataset(const Dataset& ds, std::shared_ptr<const BasisEval> basis,
                         const nnet::InputSpec& input, double lambda_bc = 1.0);

TrainResult train(const TrainSet& data, const nnet::ConditionerNet& net0, const SolverConfig& scfg,
                  const TrainConfig& tcfg, const EpochCallback& on_eval = {});

TrainResult train(const Dataset& ds, const nnet::ConditionerNet& net0, const BasisEval& basis,
                  const SolverConfig& scfg, const TrainConfig& tcfg);

// Basis used by the solver for a family: B-splines on [0, 1] in 1d, a tensor
// basis over (x, t) for NLRD.
struct SolverBasisSpec {
  BasisSpec x;
  BasisSpec t;
  TensorLayout layout = TensorLayout::WithMarginals;
};

SolverBasisSpec default_basis_spec(Family family, int n_terms = 32);
std::shared_ptr<const BasisEval> evaluate_solver_basis(const SolverBasisSpec& spec,
                                                       const Matrix& grid);

}  // namespace physopt
