// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <variant>

#include "physopt/types.hpp"

namespace physopt {

enum class OptimizerKind { Sgd, Adam, Lbfgs };

std::string_view optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct SgdConfig {
  double lr = 1e-3;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct LbfgsConfig {
  double lr = 1.0;  // initial trial step of the line search
  int history = 10;
  double c1 = 1e-4;
  int max_trials = 25;
};

// Objective value and gradient at x (gradient written into grad).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

class Sgd {
 public:
  explicit Sgd(SgdConfig cfg) : cfg_(cfg) {}
  void step(std::span<double> params, std::span<const double> grad);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }
  long step_count() const { return steps_; }

 private:
  SgdConfig cfg_;
  long steps_ = 0;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void step(std::span<double> params, std::span<const double> grad);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }
  long step_count() const { return steps_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

 private:
  AdamConfig cfg_;
  Vector m_, v_;
  long steps_ = 0;
};

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  int evaluations = 0;
};

// Two-loop recursion with Armijo backtracking along the quasi-Newton
// direction. The state (x, f, g) is owned by the caller and updated in place.
class Lbfgs {
 public:
  explicit Lbfgs(LbfgsConfig cfg) : cfg_(cfg) {}
  LineSearchResult step(Vector& x, double& f, Vector& g, const Objective& objective);
  long step_count() const { return steps_; }
  std::size_t history_size() const { return s_.size(); }
  void reset() {
    s_.clear();
    y_.clear();
  }

  Vector direction(const Vector& g) const;

 private:
  LbfgsConfig cfg_;
  std::deque<Vector> s_, y_;
  long steps_ = 0;
};

// Uniform driver over the three methods for minimizing an objective.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);
  OptimizerKind kind() const { return kind_; }
  // One update of x; f and g hold the value and gradient at x on entry and
  // are refreshed on exit.
  void step(Vector& x, double& f, Vector& g, const Objective& objective);

 private:
  OptimizerKind kind_;
  std::variant<Sgd, Adam, Lbfgs> impl_;
};

// lr at epoch e: lr0 * decay^e.
double exponential_decay(double lr0, double decay, int epoch);

}  // namespace physopt
