// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "physopt/config.hpp"
#include "physopt/error.hpp"

using namespace physopt;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Diverged: return 3;
    case ErrorKind::Io:
    case ErrorKind::Parse: return 4;
    default: return 1;
  }
}

// Flag -> config key overrides, applied in command-line order after --set.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> items;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { items.emplace_back(key, v); }, help);
  }
};

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physopt: learned physics-informed solvers and conditioning experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::string threads;
  cli::CommandOptions opts;
  Overrides ov;

  app.add_option("-c,--config", config_path, "experiment config (JSON, comments allowed)");
  app.add_option("--set", sets, "override a config key, KEY=VALUE (repeatable)");
  app.add_flag("--force", opts.force, "overwrite existing outputs");
  app.add_option("--threads", threads, "worker threads (sets PHYSOPT_THREADS)");
  ov.add(&app, "-o,--output", "output_dir", "output directory");
  ov.add(&app, "--seed", "seed", "experiment seed");
  ov.add(&app, "--family", "family", "helmholtz | poisson | nlrd");

  auto* gen = app.add_subcommand("generate", "sample instances and reference solutions");
  ov.add(gen, "--n", "dataset.n", "number of instances");
  ov.add(gen, "--train-fraction", "dataset.train_fraction", "fraction used for training");
  gen->add_option("--out", opts.out_name, "file name inside the output directory");

  auto* tr = app.add_subcommand("train", "train the conditioner through unrolled solves");
  ov.add(tr, "--dataset", "dataset.path", "dataset file (generated in memory when empty)");
  ov.add(tr, "--epochs", "train.epochs", "training epochs");
  ov.add(tr, "--steps", "solver.steps", "unrolled solver steps L");
  ov.add(tr, "--lr", "train.lr", "initial Adam learning rate");

  auto* inf = app.add_subcommand("infer", "run the learned solver on one instance");
  ov.add(inf, "--checkpoint", "checkpoint", "trained network");
  ov.add(inf, "--dataset", "dataset.path", "dataset file");
  ov.add(inf, "--index", "landscape.index", "record index in the split");
  ov.add(inf, "--steps", "solver.steps", "solver steps L");
  inf->add_option("--instance", opts.instance_path, "instance JSON (params, bc, forcing; u optional)");
  inf->add_option("--split", opts.split, "train | test");

  auto* bb = app.add_subcommand("bench-baselines", "compare the learned solver with SGD, Adam and L-BFGS");
  ov.add(bb, "--checkpoint", "checkpoint", "trained network");
  ov.add(bb, "--dataset", "dataset.path", "dataset file");
  ov.add(bb, "--instances", "bench.instances", "number of held-out instances");
  ov.add(bb, "--steps", "bench.steps", "optimizer steps");
  ov.add(bb, "--learned-steps", "bench.learned_steps", "learned solver steps (0: solver.steps)");
  ov.add(bb, "--adam-lr", "bench.adam_lr", "Adam learning rate");
  ov.add(bb, "--sgd-lr", "bench.sgd_lr", "SGD learning rate (0: 1/lambda_max)");
  bb->add_option("--split", opts.split, "train | test");

  auto* bc = app.add_subcommand("bench-conditioning", "condition numbers and GD step counts of the Fourier Poisson system");
  std::string k_list, eps_list;
  bc->add_option("--K", k_list, "comma-separated wavenumber limits");
  bc->add_option("--eps", eps_list, "comma-separated error reductions");
  ov.add(bc, "--lambda", "conditioning.lambda_bc", "boundary weight");
  ov.add(bc, "--c", "conditioning.c", "step constant in (0, 1)");

  auto* ls = app.add_subcommand("landscape", "2d loss slice around the solution");
  ov.add(ls, "--loss", "landscape.loss", "pde | data");
  ov.add(ls, "--basis", "landscape.basis", "hessian | random");
  ov.add(ls, "--checkpoint", "checkpoint", "anchor at the learned solver output");
  ov.add(ls, "--dataset", "dataset.path", "dataset file");
  ov.add(ls, "--index", "landscape.index", "record index in the split");
  ov.add(ls, "--resolution", "landscape.resolution", "grid points per axis");
  ls->add_option("--split", opts.split, "train | test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    if (!threads.empty()) setenv("PHYSOPT_THREADS", threads.c_str(), 1);
    ExperimentConfig cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) raise(ErrorKind::Config, "--set expects KEY=VALUE, got '" + s + "'");
      apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : ov.items) {
      // Text-valued keys are quoted so that e.g. a path like "1" stays a string.
      const bool text = key == "output_dir" || key == "family" || key == "dataset.path" ||
                        key == "checkpoint" || key == "landscape.loss" || key == "landscape.basis";
      apply_override(cfg, key, text ? quoted(value) : value);
    }
    if (!k_list.empty()) apply_override(cfg, "conditioning.K", "[" + k_list + "]");
    if (!eps_list.empty()) apply_override(cfg, "conditioning.eps", "[" + eps_list + "]");

    if (cmd == "generate") return cli::cmd_generate(cfg, opts);
    if (cmd == "train") return cli::cmd_train(cfg, opts);
    if (cmd == "infer") return cli::cmd_infer(cfg, opts);
    if (cmd == "bench-baselines") return cli::cmd_bench_baselines(cfg, opts);
    if (cmd == "bench-conditioning") return cli::cmd_bench_conditioning(cfg, opts);
    if (cmd == "landscape") return cli::cmd_landscape(cfg, opts);
  } catch (const Error& e) {
    std::fprintf(stderr, "physopt %s: %s\n", cmd.c_str(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "physopt %s: %s\n", cmd.c_str(), e.what());
    return 1;
  }
  return 1;
}
