// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "output.hpp"
#include "physopt/bench.hpp"
#include "physopt/csv.hpp"
#include "physopt/dataset.hpp"
#include "physopt/error.hpp"
#include "physopt/parallel.hpp"
#include "physopt/solver.hpp"
#include "physopt/theory.hpp"

namespace physopt::cli {

namespace {

Dataset load_or_generate(const ExperimentConfig& cfg) {
  Dataset ds;
  if (cfg.dataset.path.empty()) {
    ds = generate_dataset(cfg.family, cfg.dataset.n, cfg.seed, cfg.dataset.train_fraction);
  } else {
    ds = read_dataset(cfg.dataset.path);
    if (ds.family != cfg.family)
      raise(ErrorKind::Config, "dataset holds '" + std::string(family_name(ds.family)) +
                                   "' instances, config family is '" +
                                   std::string(family_name(cfg.family)) + "'");
  }
  if (cfg.dataset.max_train > 0 && ds.train.size() > std::size_t(cfg.dataset.max_train))
    ds.train.resize(cfg.dataset.max_train);
  if (cfg.dataset.max_test > 0 && ds.test.size() > std::size_t(cfg.dataset.max_test))
    ds.test.resize(cfg.dataset.max_test);
  return ds;
}

Matrix family_grid(Family family, const GridSpec& grid) {
  Rng rng(0);
  return sample_instance(family, rng, grid).grid;
}

std::shared_ptr<const BasisEval> solver_basis(const ExperimentConfig& cfg, const GridSpec& grid) {
  return evaluate_solver_basis(basis_spec_from(cfg), family_grid(cfg.family, grid));
}

nnet::ConditionerNet load_net(const ExperimentConfig& cfg) {
  if (cfg.checkpoint.empty()) raise(ErrorKind::Config, "no checkpoint given (checkpoint key or --checkpoint)");
  nnet::ConditionerNet net = nnet::load_checkpoint(cfg.checkpoint);
  if (net.family != cfg.family)
    raise(ErrorKind::Config, "checkpoint was trained on '" + std::string(family_name(net.family)) + "'");
  return net;
}

const std::vector<Record>& pick_split(const Dataset& ds, const std::string& split) {
  if (split == "test") return ds.test;
  if (split == "train") return ds.train;
  raise(ErrorKind::Config, "split must be 'train' or 'test'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / double(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

int cmd_generate(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "generate", opts.force);
  const std::string path = out.claim(opts.out_name.empty() ? "dataset.ndjson" : opts.out_name);
  const Dataset ds = generate_dataset(cfg.family, cfg.dataset.n, cfg.seed, cfg.dataset.train_fraction);
  write_dataset(ds, path);
  out.finish(config_to_json(cfg));
  std::printf("generate: %zu records (%zu train / %zu test), family %s, seed %llu -> %s\n",
              ds.train.size() + ds.test.size(), ds.train.size(), ds.test.size(),
              std::string(family_name(cfg.family)).c_str(), static_cast<unsigned long long>(cfg.seed),
              path.c_str());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "train", opts.force);
  const std::string hist_path = out.claim("history.csv");
  const std::string ckpt_path = out.claim("checkpoint.bin");
  const Dataset ds = load_or_generate(cfg);
  const auto basis = solver_basis(cfg, ds.grid);
  const nnet::ConditionerNet net0 = build_network(cfg);
  const TrainSet data = prepare_dataset(ds, basis, net0.input, cfg.lambda_bc);
  std::printf("train: %zu train / %zu test instances, %zu parameters, L = %d\n", data.train.size(),
              data.test.size(), net0.weights.size(), cfg.solver.steps);
  CsvWriter hist(hist_path, {"epoch", "train_rel_mse", "test_rel_mse", "lr"});
  const TrainResult res = train(data, net0, cfg.solver, cfg.train, [&](const HistoryRow& r) {
    hist.field(r.epoch).field(r.train_rel_mse).field(r.test_rel_mse).field(r.lr).end_row();
    std::printf("  epoch %5d  train %.4e  test %.4e  lr %.3e\n", r.epoch, r.train_rel_mse,
                r.test_rel_mse, r.lr);
    std::fflush(stdout);
  });
  hist.close();
  nnet::save_checkpoint(res.net, ckpt_path);
  out.finish(config_to_json(cfg));
  if (res.diverged_instances > 0)
    std::printf("train: %d instance solves diverged and were skipped\n", res.diverged_instances);
  std::printf("train: checkpoint -> %s\n", ckpt_path.c_str());
  return 0;
}

int cmd_infer(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "infer", opts.force);
  const std::string sol_path = out.claim("solution.csv");
  const std::string trace_path = out.claim("trace.csv");
  const nnet::ConditionerNet net = load_net(cfg);
  const GridSpec grid = default_grid(cfg.family);

  PdeInstance inst;
  Vector reference;
  if (!opts.instance_path.empty()) {
    const std::string text = read_text(opts.instance_path);
    try {
      inst = instance_from_json(text, cfg.family, grid);
      if (nlohmann::json::parse(text).contains("u"))
        reference = record_from_json(text, cfg.family, grid).solution.values;
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorKind::Parse, opts.instance_path + ": " + e.what());
    }
  } else {
    const Dataset ds = load_or_generate(cfg);
    const auto& recs = pick_split(ds, opts.split);
    const int idx = cfg.landscape.index;
    if (idx < 0 || std::size_t(idx) >= recs.size())
      raise(ErrorKind::Config, "instance index " + std::to_string(idx) + " out of range");
    inst = recs[idx].instance;
    reference = recs[idx].solution.values;
  }
  const auto basis = solver_basis(cfg, grid);
  const PreparedInstance p = prepare_instance(inst, basis, net.input, cfg.lambda_bc);
  const InferResult r = infer(net, p, cfg.solver, initial_theta(cfg.solver, p.problem->size(), 0));

  const Vector u = p.problem->reconstruct(r.theta);
  std::vector<std::string> header;
  header.push_back("x");
  if (inst.dims() == 2) header.push_back("t");
  header.push_back("u");
  if (reference.size()) header.push_back("reference");
  CsvWriter sol(sol_path, header);
  for (int j = 0; j < inst.num_points(); ++j) {
    for (int d = 0; d < inst.dims(); ++d) sol.field(inst.grid(j, d));
    sol.field(u[j]);
    if (reference.size()) sol.field(reference[j]);
    sol.end_row();
  }
  sol.close();
  CsvWriter tr(trace_path, {"step", "pde_loss", "rel_mse"});
  for (std::size_t l = 0; l < r.trace.size(); ++l) {
    tr.field(static_cast<long long>(l)).field(r.trace[l]);
    tr.field(reference.size() ? relative_mse(p.problem->reconstruct(r.iterates[l]), reference)
                              : std::numeric_limits<double>::quiet_NaN());
    tr.end_row();
  }
  tr.close();
  out.finish(config_to_json(cfg));
  std::printf("infer: L_PDE %.4e -> %.4e", r.trace.front(), r.trace.back());
  if (reference.size()) std::printf(", relative MSE %.4e", relative_mse(u, reference));
  std::printf("\n");
  return 0;
}

int cmd_bench_baselines(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "bench-baselines", opts.force);
  const std::string trace_path = out.claim("trace.csv");
  const std::string summary_path = out.claim("summary.csv");
  const nnet::ConditionerNet net = load_net(cfg);
  const Dataset ds = load_or_generate(cfg);
  const auto& recs = pick_split(ds, opts.split);
  const std::size_t n = std::min<std::size_t>(recs.size(), std::size_t(cfg.bench.instances));
  if (n == 0) raise(ErrorKind::Config, "no instances to benchmark");
  const auto basis = solver_basis(cfg, ds.grid);
  SolverConfig scfg = cfg.solver;
  if (cfg.bench.learned_steps > 0) scfg.steps = cfg.bench.learned_steps;

  struct Row {
    std::string method;
    int step;
    double loss, rel;
  };
  const char* methods[] = {"learned", "sgd", "adam", "lbfgs"};
  std::vector<std::vector<Row>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const PreparedInstance p = prepare_instance(recs[i].instance, basis, net.input, cfg.lambda_bc);
    const Vector& ref = recs[i].solution.values;
    const Vector theta0 = initial_theta(scfg, p.problem->size(), i);
    const InferResult r = infer(net, p, scfg, theta0);
    for (std::size_t l = 0; l < r.trace.size(); ++l)
      rows[i].push_back({"learned", int(l), r.trace[l], relative_mse(p.problem->reconstruct(r.iterates[l]), ref)});
    const double sgd_lr = cfg.bench.sgd_lr > 0.0 ? cfg.bench.sgd_lr : inverse_curvature_lr(*p.problem, theta0);
    const std::pair<OptimizerKind, double> runs[] = {{OptimizerKind::Sgd, sgd_lr},
                                                      {OptimizerKind::Adam, cfg.bench.adam_lr},
                                                      {OptimizerKind::Lbfgs, cfg.bench.lbfgs_lr}};
    for (const auto& [kind, lr] : runs) {
      const OptimTrace t = run_optimizer(*p.problem, kind, lr, cfg.bench.steps, theta0, ref);
      for (std::size_t k = 0; k < t.step.size(); ++k)
        rows[i].push_back({std::string(optimizer_name(kind)), t.step[k], t.pde_loss[k], t.rel_mse[k]});
    }
  });

  CsvWriter tr(trace_path, {"method", "instance", "step", "pde_loss", "rel_mse"});
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> agg;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Row& r : rows[i]) {
      tr.field(r.method).field(static_cast<long long>(i)).field(r.step).field(r.loss).field(r.rel).end_row();
      auto& a = agg[{r.method, r.step}];
      a.first.push_back(r.loss);
      a.second.push_back(r.rel);
    }
  }
  tr.close();
  CsvWriter sum(summary_path, {"method", "step", "instances", "mean_pde_loss", "median_pde_loss",
                               "mean_rel_mse", "median_rel_mse"});
  for (const char* m : methods) {
    for (auto it = agg.lower_bound({m, std::numeric_limits<int>::min()});
         it != agg.end() && it->first.first == m; ++it) {
      const auto& [losses, rels] = it->second;
      sum.field(m).field(it->first.second).field(static_cast<long long>(losses.size()));
      sum.field(mean_of(losses)).field(median_of(losses)).field(mean_of(rels)).field(median_of(rels));
      sum.end_row();
    }
  }
  sum.close();
  out.finish(config_to_json(cfg));

  std::printf("bench-baselines: %zu instances, %d optimizer steps, learned L = %d\n", n,
              cfg.bench.steps, scfg.steps);
  for (const char* m : methods) {
    auto last = agg.end();
    for (auto it = agg.lower_bound({m, std::numeric_limits<int>::min()});
         it != agg.end() && it->first.first == m; ++it)
      last = it;
    if (last == agg.end()) continue;
    std::printf("  %-8s step %6d  mean L_PDE %.4e  mean rel MSE %.4e\n", m, last->first.second,
                mean_of(last->second.first), mean_of(last->second.second));
  }
  return 0;
}

int cmd_bench_conditioning(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "bench-conditioning", opts.force);
  const std::string path = out.claim("conditioning.csv");
  const auto& cc = cfg.conditioning;
  std::vector<std::string> header{"K", "lambda_bc", "n", "rank", "lambda_min", "lambda_max", "kappa", "K4"};
  for (double e : cc.eps) {
    header.push_back("steps_eps_" + format_double(e));
    header.push_back("capped_eps_" + format_double(e));
  }
  struct Result {
    ConditioningReport rep;
    std::vector<StepCount> counts;
  };
  std::vector<Result> res(cc.K.size());
  parallel_for(cc.K.size(), [&](std::size_t i) {
    const LinearSystem sys = fourier_poisson_system(cc.K[i], cc.lambda_bc);
    res[i].rep = spectrum_and_kappa(sys);
    for (double e : cc.eps) res[i].counts.push_back(gd_step_count(sys, e, cc.c, cc.seed));
  });
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < cc.K.size(); ++i) {
    const auto& r = res[i].rep;
    csv.field(cc.K[i]).field(cc.lambda_bc).field(r.n).field(r.rank).field(r.lambda_min).field(r.lambda_max);
    csv.field(r.kappa).field(std::pow(double(cc.K[i]), 4));
    for (const StepCount& s : res[i].counts) csv.field(s.steps).field(s.capped ? 1 : 0);
    csv.end_row();
    std::printf("K = %3d  kappa = %.6e  (K^4 = %.0f)", cc.K[i], r.kappa, std::pow(double(cc.K[i]), 4));
    for (std::size_t e = 0; e < cc.eps.size(); ++e)
      std::printf("  N(%g) = %ld%s", cc.eps[e], res[i].counts[e].steps, res[i].counts[e].capped ? " (cap)" : "");
    std::printf("\n");
  }
  csv.close();
  out.finish(config_to_json(cfg));
  return 0;
}

int cmd_landscape(const ExperimentConfig& cfg, const CommandOptions& opts) {
  RunOutput out(cfg.output_dir, "landscape", opts.force);
  const std::string path = out.claim("landscape.csv");
  const Dataset ds = load_or_generate(cfg);
  const auto& recs = pick_split(ds, opts.split);
  const auto& lc = cfg.landscape;
  if (lc.index < 0 || std::size_t(lc.index) >= recs.size())
    raise(ErrorKind::Config, "landscape.index " + std::to_string(lc.index) + " out of range");
  const Record& rec = recs[lc.index];
  const auto basis = solver_basis(cfg, ds.grid);
  const PdeProblem problem(rec.instance, basis, default_loss_config(rec.instance, cfg.lambda_bc));
  const Vector theta0 = initial_theta(cfg.solver, problem.size(), std::size_t(lc.index));

  // Anchor: the learned solver's Theta_L when a checkpoint is given, else the
  // minimizer of L_PDE; the trajectory is the corresponding iterate sequence.
  Vector anchor;
  std::vector<Vector> path_iterates;
  if (!cfg.checkpoint.empty()) {
    const nnet::ConditionerNet net = load_net(cfg);
    const PreparedInstance p = prepare_instance(rec.instance, basis, net.input, cfg.lambda_bc);
    const InferResult r = infer(net, p, cfg.solver, theta0);
    anchor = r.theta;
    path_iterates = r.iterates;
  } else {
    if (problem.is_linear()) {
      const LinearSystem sys = assemble_linear_system(problem);
      anchor = sys.A.ldlt().solve(sys.b);
    } else {
      anchor = run_optimizer(problem, OptimizerKind::Lbfgs, 1.0, 500, theta0).theta;
    }
    // Plain gradient descent at lr = 1 / lambda_max from theta0.
    const double lr = inverse_curvature_lr(problem, theta0);
    Vector x = theta0;
    path_iterates.push_back(x);
    for (int k = 0; k < lc.trajectory_steps; ++k) {
      x -= lr * problem.loss_and_grad(x).grad;
      if (!x.allFinite()) break;
      path_iterates.push_back(x);
    }
  }
  LandscapeOptions lo;
  lo.loss = lc.loss == "data" ? LandscapeLoss::Data : LandscapeLoss::Pde;
  lo.basis = lc.basis == "random" ? LandscapeBasis::Random : LandscapeBasis::Hessian;
  lo.resolution = lc.resolution;
  lo.alpha_span = lc.alpha_span;
  lo.beta_span = lc.beta_span;
  lo.seed = cfg.seed;
  const Vector target = lo.loss == LandscapeLoss::Data ? rec.solution.values : Vector();
  const LandscapeSlice s = landscape_slice(problem, anchor, theta0, lo, target, {path_iterates});

  CsvWriter csv(path, {"kind", "index", "alpha", "beta", "loss"});
  for (Eigen::Index i = 0; i < s.alphas.size(); ++i)
    for (Eigen::Index j = 0; j < s.betas.size(); ++j)
      csv.field("grid").field(static_cast<long long>(i * s.betas.size() + j)).field(s.alphas[i]).field(s.betas[j]).field(s.values(i, j)).end_row();
  for (std::size_t k = 0; k < s.trajectories[0].size(); ++k) {
    const double loss = lo.loss == LandscapeLoss::Pde
                            ? problem.loss(path_iterates[k])
                            : (problem.reconstruct(path_iterates[k]) - target).squaredNorm() / double(target.size());
    csv.field("trajectory").field(static_cast<long long>(k)).field(s.trajectories[0][k].first);
    csv.field(s.trajectories[0][k].second).field(loss).end_row();
  }
  csv.close();
  out.finish(config_to_json(cfg));
  Eigen::Index bi, bj;
  s.values.minCoeff(&bi, &bj);
  std::printf("landscape: %dx%d grid, minimum at (alpha, beta) = (%.4g, %.4g)", lo.resolution,
              lo.resolution, s.alphas[bi], s.betas[bj]);
  if (lo.basis == LandscapeBasis::Hessian)
    std::printf(", Hessian eigenvalues %.4e / %.4e", s.lambda_u, s.lambda_v);
  std::printf("\n");
  return 0;
}

}  // namespace physopt::cli
