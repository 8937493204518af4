// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "physopt/nnet/conditioner.hpp"
#include "physopt/pde.hpp"
#include "physopt/solver.hpp"

namespace physopt {

struct NetworkConfig {
  std::string type = "fno";  // fno | mlp
  nnet::FnoOptions fno;
  nnet::MlpOptions mlp;
  nnet::InputSpec inputs;
};

struct DatasetConfig {
  std::string path;
  int n = 1000;
  double train_fraction = 0.8;
  int max_train = 0;  // 0: all
  int max_test = 0;
};

struct BenchConfig {
  int instances = 20;
  int steps = 10000;
  double sgd_lr = 0.0;  // 0: 1 / lambda_max of the loss Hessian, per instance
  double adam_lr = 1e-2;
  double lbfgs_lr = 1.0;
  int learned_steps = 0;  // 0: solver.steps
};

struct ConditioningConfig {
  std::vector<int> K{4, 8, 16};
  double lambda_bc = 1.0;
  std::vector<double> eps{1e-3};
  double c = 0.9;
  std::uint64_t seed = 0;
};

struct LandscapeConfig {
  std::string loss = "pde";       // pde | data
  std::string basis = "hessian";  // hessian | random
  int resolution = 41;
  double alpha_span = 1.0;
  double beta_span = 1.0;
  int index = 0;  // test instance
  int trajectory_steps = 100;
};

struct ExperimentConfig {
  Family family = Family::Poisson1d;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int basis_terms = 32;
  int basis_degree = 3;
  KnotConfig knots = KnotConfig::Shifted;
  int time_terms = 8;  // NLRD time basis
  double lambda_bc = 1.0;
  SolverConfig solver;
  TrainConfig train;
  NetworkConfig network;
  DatasetConfig dataset;
  std::string checkpoint;
  BenchConfig bench;
  ConditioningConfig conditioning;
  LandscapeConfig landscape;
};

// Parses JSON text (comments allowed) over the defaults. Unknown keys and
// ill-typed values raise Config errors naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

// Sets a dotted key ("train.epochs") from text; the value is read as JSON
// and falls back to a plain string.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

SolverBasisSpec basis_spec_from(const ExperimentConfig& cfg);
nnet::ConditionerNet build_network(const ExperimentConfig& cfg);

}  // namespace physopt
