// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "physopt/error.hpp"

namespace physopt {

using nlohmann::json;

namespace {

const char* knots_name(KnotConfig k) { return k == KnotConfig::Shifted ? "shifted" : "equispaced"; }

json to_json(const ExperimentConfig& c) {
  const auto& in = c.network.inputs;
  return json{
      {"family", family_name(c.family)},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"basis", {{"n_terms", c.basis_terms}, {"degree", c.basis_degree}, {"knots", knots_name(c.knots)},
                 {"time_terms", c.time_terms}}},
      {"loss", {{"lambda_bc", c.lambda_bc}}},
      {"solver",
       {{"steps", c.solver.steps},
        {"eta", c.solver.eta},
        {"theta0", c.solver.theta0 == Theta0Init::Zeros ? "zeros" : "gaussian"},
        {"theta0_sigma", c.solver.theta0_sigma},
        {"theta0_seed", c.solver.theta0_seed},
        {"update_rule", c.solver.update_rule == UpdateRule::GdUpdate ? "gd" : "direct"}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"lr", c.train.lr},
        {"lr_decay", c.train.lr_decay},
        {"smooth_l1_delta", c.train.smooth_l1_delta},
        {"eval_every", c.train.eval_every},
        {"seed", c.train.seed}}},
      {"network",
       {{"type", c.network.type},
        {"width", c.network.fno.width},
        {"modes", c.network.fno.modes},
        {"blocks", c.network.fno.blocks},
        {"fc", c.network.fno.fc},
        {"hidden", c.network.mlp.hidden},
        {"depth", c.network.mlp.depth},
        {"encoding", in.encoding == nnet::GradientEncoding::Normalized ? "normalized" : "scaled"},
        {"gradient_scale", in.gradient_scale},
        {"gamma_frequencies", in.gamma_frequencies},
        {"inputs",
         {{"gradient", in.gradient}, {"gamma", in.gamma}, {"bc", in.bc}, {"forcing", in.forcing},
          {"position", in.position}}}}},
      {"dataset",
       {{"path", c.dataset.path},
        {"n", c.dataset.n},
        {"train_fraction", c.dataset.train_fraction},
        {"max_train", c.dataset.max_train},
        {"max_test", c.dataset.max_test}}},
      {"checkpoint", c.checkpoint},
      {"bench",
       {{"instances", c.bench.instances},
        {"steps", c.bench.steps},
        {"sgd_lr", c.bench.sgd_lr},
        {"adam_lr", c.bench.adam_lr},
        {"lbfgs_lr", c.bench.lbfgs_lr},
        {"learned_steps", c.bench.learned_steps}}},
      {"conditioning",
       {{"K", c.conditioning.K},
        {"lambda_bc", c.conditioning.lambda_bc},
        {"eps", c.conditioning.eps},
        {"c", c.conditioning.c},
        {"seed", c.conditioning.seed}}},
      {"landscape",
       {{"loss", c.landscape.loss},
        {"basis", c.landscape.basis},
        {"resolution", c.landscape.resolution},
        {"alpha_span", c.landscape.alpha_span},
        {"beta_span", c.landscape.beta_span},
        {"index", c.landscape.index},
        {"trajectory_steps", c.landscape.trajectory_steps}}},
  };
}

bool same_kind(const json& def, const json& val) {
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_number_integer() || def.is_number_unsigned())
    return val.is_number_integer() || val.is_number_unsigned();
  if (def.is_number()) return val.is_number();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return false;
}

void merge_strict(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) raise(ErrorKind::Config, "'" + prefix + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) raise(ErrorKind::Config, "unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (!same_kind(slot, it.value())) raise(ErrorKind::Config, "wrong type for '" + key + "'");
    if (slot.is_object()) merge_strict(slot, it.value(), key);
    else slot = it.value();
  }
}

template <typename T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception&) {
    raise(ErrorKind::Config, std::string("bad value for '") + section + "." + key + "'");
  }
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.family = parse_family(j.at("family").get<std::string>());
  } catch (const Error&) {
    raise(ErrorKind::Config, "unknown family '" + j.at("family").get<std::string>() + "'");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  c.output_dir = j.at("output_dir").get<std::string>();
  c.basis_terms = get<int>(j, "basis", "n_terms");
  c.basis_degree = get<int>(j, "basis", "degree");
  const auto knots = get<std::string>(j, "basis", "knots");
  if (knots == "shifted") c.knots = KnotConfig::Shifted;
  else if (knots == "equispaced") c.knots = KnotConfig::Equispaced;
  else raise(ErrorKind::Config, "basis.knots must be 'shifted' or 'equispaced'");
  c.time_terms = get<int>(j, "basis", "time_terms");
  c.lambda_bc = get<double>(j, "loss", "lambda_bc");

  c.solver.steps = get<int>(j, "solver", "steps");
  c.solver.eta = get<double>(j, "solver", "eta");
  const auto t0 = get<std::string>(j, "solver", "theta0");
  if (t0 == "zeros") c.solver.theta0 = Theta0Init::Zeros;
  else if (t0 == "gaussian") c.solver.theta0 = Theta0Init::GaussianSmall;
  else raise(ErrorKind::Config, "solver.theta0 must be 'zeros' or 'gaussian'");
  c.solver.theta0_sigma = get<double>(j, "solver", "theta0_sigma");
  c.solver.theta0_seed = get<std::uint64_t>(j, "solver", "theta0_seed");
  const auto rule = get<std::string>(j, "solver", "update_rule");
  if (rule == "gd") c.solver.update_rule = UpdateRule::GdUpdate;
  else if (rule == "direct") c.solver.update_rule = UpdateRule::Direct;
  else raise(ErrorKind::Config, "solver.update_rule must be 'gd' or 'direct'");

  c.train.epochs = get<int>(j, "train", "epochs");
  c.train.batch_size = get<int>(j, "train", "batch_size");
  c.train.lr = get<double>(j, "train", "lr");
  c.train.lr_decay = get<double>(j, "train", "lr_decay");
  c.train.smooth_l1_delta = get<double>(j, "train", "smooth_l1_delta");
  c.train.eval_every = get<int>(j, "train", "eval_every");
  c.train.seed = get<std::uint64_t>(j, "train", "seed");

  c.network.type = get<std::string>(j, "network", "type");
  if (c.network.type != "fno" && c.network.type != "mlp")
    raise(ErrorKind::Config, "network.type must be 'fno' or 'mlp'");
  c.network.fno.width = get<int>(j, "network", "width");
  c.network.fno.modes = get<int>(j, "network", "modes");
  c.network.fno.blocks = get<int>(j, "network", "blocks");
  c.network.fno.fc = get<int>(j, "network", "fc");
  c.network.mlp.hidden = get<int>(j, "network", "hidden");
  c.network.mlp.depth = get<int>(j, "network", "depth");
  const auto enc = get<std::string>(j, "network", "encoding");
  if (enc == "normalized") c.network.inputs.encoding = nnet::GradientEncoding::Normalized;
  else if (enc == "scaled") c.network.inputs.encoding = nnet::GradientEncoding::Scaled;
  else raise(ErrorKind::Config, "network.encoding must be 'normalized' or 'scaled'");
  c.network.inputs.gradient_scale = get<double>(j, "network", "gradient_scale");
  c.network.inputs.gamma_frequencies = get<int>(j, "network", "gamma_frequencies");
  if (c.network.inputs.gamma_frequencies < 0 || c.network.inputs.gamma_frequencies > 64)
    raise(ErrorKind::Config, "network.gamma_frequencies must be in [0, 64]");
  const json& in = j.at("network").at("inputs");
  c.network.inputs.gradient = in.at("gradient").get<bool>();
  c.network.inputs.gamma = in.at("gamma").get<bool>();
  c.network.inputs.bc = in.at("bc").get<bool>();
  c.network.inputs.forcing = in.at("forcing").get<bool>();
  c.network.inputs.position = in.at("position").get<bool>();

  c.dataset.path = get<std::string>(j, "dataset", "path");
  c.dataset.n = get<int>(j, "dataset", "n");
  c.dataset.train_fraction = get<double>(j, "dataset", "train_fraction");
  c.dataset.max_train = get<int>(j, "dataset", "max_train");
  c.dataset.max_test = get<int>(j, "dataset", "max_test");
  c.checkpoint = j.at("checkpoint").get<std::string>();

  c.bench.instances = get<int>(j, "bench", "instances");
  c.bench.steps = get<int>(j, "bench", "steps");
  c.bench.sgd_lr = get<double>(j, "bench", "sgd_lr");
  c.bench.adam_lr = get<double>(j, "bench", "adam_lr");
  c.bench.lbfgs_lr = get<double>(j, "bench", "lbfgs_lr");
  c.bench.learned_steps = get<int>(j, "bench", "learned_steps");

  c.conditioning.K = get<std::vector<int>>(j, "conditioning", "K");
  c.conditioning.lambda_bc = get<double>(j, "conditioning", "lambda_bc");
  c.conditioning.eps = get<std::vector<double>>(j, "conditioning", "eps");
  c.conditioning.c = get<double>(j, "conditioning", "c");
  c.conditioning.seed = get<std::uint64_t>(j, "conditioning", "seed");

  c.landscape.loss = get<std::string>(j, "landscape", "loss");
  c.landscape.basis = get<std::string>(j, "landscape", "basis");
  c.landscape.resolution = get<int>(j, "landscape", "resolution");
  c.landscape.alpha_span = get<double>(j, "landscape", "alpha_span");
  c.landscape.beta_span = get<double>(j, "landscape", "beta_span");
  c.landscape.index = get<int>(j, "landscape", "index");
  c.landscape.trajectory_steps = get<int>(j, "landscape", "trajectory_steps");

  // Range checks.
  if (c.basis_terms < 1 || c.basis_degree < 0 || c.time_terms < 1)
    raise(ErrorKind::Config, "basis sizes must be positive");
  if (!(c.lambda_bc > 0.0)) raise(ErrorKind::Config, "loss.lambda_bc must be positive");
  if (c.solver.steps < 1) raise(ErrorKind::Config, "solver.steps must be >= 1");
  if (!(c.solver.eta > 0.0)) raise(ErrorKind::Config, "solver.eta must be positive");
  if (c.train.epochs < 0 || c.train.batch_size < 1 || c.train.eval_every < 1 || !(c.train.lr > 0.0) ||
      !(c.train.lr_decay > 0.0) || !(c.train.smooth_l1_delta > 0.0))
    raise(ErrorKind::Config, "train values out of range");
  if (c.dataset.n < 0 || c.dataset.train_fraction < 0.0 || c.dataset.train_fraction > 1.0)
    raise(ErrorKind::Config, "dataset values out of range");
  if (c.bench.instances < 1 || c.bench.steps < 0) raise(ErrorKind::Config, "bench values out of range");
  for (int k : c.conditioning.K)
    if (k < 1) raise(ErrorKind::Config, "conditioning.K entries must be positive");
  for (double e : c.conditioning.eps)
    if (!(e > 0.0 && e < 1.0)) raise(ErrorKind::Config, "conditioning.eps entries must be in (0, 1)");
  if (!(c.conditioning.c > 0.0 && c.conditioning.c < 1.0))
    raise(ErrorKind::Config, "conditioning.c must be in (0, 1)");
  if (c.landscape.loss != "pde" && c.landscape.loss != "data")
    raise(ErrorKind::Config, "landscape.loss must be 'pde' or 'data'");
  if (c.landscape.basis != "hessian" && c.landscape.basis != "random")
    raise(ErrorKind::Config, "landscape.basis must be 'hessian' or 'random'");
  if (c.landscape.resolution < 2) raise(ErrorKind::Config, "landscape.resolution must be >= 2");
  return c;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::Config, std::string("cannot parse config: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json merged = to_json(ExperimentConfig{});
  merge_strict(merged, parse_text(text), "");
  return from_json(merged);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  json patch = json::object();
  json* cur = &patch;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) raise(ErrorKind::Config, "malformed key '" + key + "'");
    if (dot == std::string::npos) {
      (*cur)[part] = v;
      break;
    }
    (*cur)[part] = json::object();
    cur = &(*cur)[part];
    start = dot + 1;
  }
  json merged = to_json(cfg);
  merge_strict(merged, patch, "");
  cfg = from_json(merged);
}

SolverBasisSpec basis_spec_from(const ExperimentConfig& cfg) {
  SolverBasisSpec s = default_basis_spec(cfg.family, cfg.basis_terms);
  s.x.degree = cfg.basis_degree;
  s.x.knots = cfg.knots;
  if (cfg.family == Family::Nlrd1dt) {
    s.x.n_terms = cfg.basis_terms;
    s.t.n_terms = cfg.time_terms;
    s.t.degree = cfg.basis_degree;
    s.t.knots = cfg.knots;
  }
  return s;
}

nnet::ConditionerNet build_network(const ExperimentConfig& cfg) {
  const SolverBasisSpec spec = basis_spec_from(cfg);
  const int n = cfg.family == Family::Nlrd1dt
                    ? tensor_size(spec.x.n_terms, spec.t.n_terms, spec.layout)
                    : spec.x.n_terms;
  const std::uint64_t seed = cfg.seed;
  if (cfg.network.type == "mlp")
    return nnet::make_mlp_conditioner(cfg.family, n, cfg.network.inputs, cfg.network.mlp, seed);
  return nnet::make_fno_conditioner(cfg.family, n, cfg.network.inputs, cfg.network.fno, seed);
}

}  // namespace physopt
