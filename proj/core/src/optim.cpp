// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "physopt/optim.hpp"

#include <cmath>
#include <string>

#include "physopt/error.hpp"

namespace physopt {

std::string_view optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::Lbfgs: return "lbfgs";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "lbfgs") return OptimizerKind::Lbfgs;
  raise(ErrorKind::Config, "unknown optimizer '" + std::string(name) + "'");
}

namespace {

void check_sizes(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) raise(ErrorKind::ShapeMismatch, "parameter/gradient sizes differ");
  for (double g : grad)
    if (!std::isfinite(g)) raise(ErrorKind::Diverged, "non-finite gradient");
}

}  // namespace

void Sgd::step(std::span<double> params, std::span<const double> grad) {
  check_sizes(params, grad);
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] = params[i] - cfg_.lr * grad[i];
    if (!std::isfinite(params[i])) raise(ErrorKind::Diverged, "SGD update is not finite");
  }
  ++steps_;
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  check_sizes(params, grad);
  const auto n = static_cast<Eigen::Index>(params.size());
  if (m_.size() != n) {
    m_ = Vector::Zero(n);
    v_ = Vector::Zero(n);
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = grad[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    if (!std::isfinite(params[i])) raise(ErrorKind::Diverged, "Adam update is not finite");
  }
}

Vector Lbfgs::direction(const Vector& g) const {
  const std::size_t m = s_.size();
  Vector q = g;
  std::vector<double> alpha(m), rho(m);
  for (std::size_t k = m; k-- > 0;) {
    rho[k] = 1.0 / y_[k].dot(s_[k]);
    alpha[k] = rho[k] * s_[k].dot(q);
    q -= alpha[k] * y_[k];
  }
  double gamma = 1.0;
  if (m > 0) gamma = s_.back().dot(y_.back()) / y_.back().squaredNorm();
  else if (g.norm() > 0.0) gamma = 1.0 / g.norm();
  Vector r = gamma * q;
  for (std::size_t k = 0; k < m; ++k) {
    const double beta = rho[k] * y_[k].dot(r);
    r += (alpha[k] - beta) * s_[k];
  }
  return -r;
}

LineSearchResult Lbfgs::step(Vector& x, double& f, Vector& g, const Objective& objective) {
  if (!g.allFinite() || !std::isfinite(f)) raise(ErrorKind::Diverged, "non-finite L-BFGS state");
  Vector d = direction(g);
  double slope = g.dot(d);
  if (!(slope < 0.0)) {
    reset();
    d = direction(g);
    slope = g.dot(d);
  }
  LineSearchResult res;
  if (!(slope < 0.0)) return res;  // zero gradient
  Vector g_new(x.size());
  double a = cfg_.lr;
  for (int trial = 0; trial < cfg_.max_trials; ++trial) {
    const Vector x_new = x + a * d;
    const double f_new = objective(x_new, g_new);
    ++res.evaluations;
    if (std::isfinite(f_new) && f_new <= f + cfg_.c1 * a * slope) {
      // Refine with the minimizer of the quadratic through f(0), f'(0), f(a);
      // exact on quadratic objectives.
      Vector x_acc = x_new, g_acc = g_new;
      double f_acc = f_new, a_acc = a;
      const double curv = f_new - f - slope * a;
      if (curv > 0.0) {
        const double aq = -slope * a * a / (2.0 * curv);
        if (aq > 0.0 && std::abs(aq - a) > 1e-12 * a) {
          Vector g_q(x.size());
          const Vector x_q = x + aq * d;
          const double f_q = objective(x_q, g_q);
          ++res.evaluations;
          if (std::isfinite(f_q) && f_q < f_new && f_q <= f + cfg_.c1 * aq * slope) {
            x_acc = x_q;
            g_acc = g_q;
            f_acc = f_q;
            a_acc = aq;
          }
        }
      }
      const Vector s = x_acc - x;
      const Vector y = g_acc - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        s_.push_back(s);
        y_.push_back(y);
        if (static_cast<int>(s_.size()) > cfg_.history) {
          s_.pop_front();
          y_.pop_front();
        }
      } else {
        // Armijo alone does not guarantee positive curvature; stale pairs
        // would keep producing the same poor direction.
        reset();
      }
      x = x_acc;
      g = g_acc;
      f = f_acc;
      res.success = true;
      res.step = a_acc;
      ++steps_;
      if (!x.allFinite()) raise(ErrorKind::Diverged, "L-BFGS update is not finite");
      return res;
    }
    a *= 0.5;
  }
  return res;
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), impl_(Sgd(SgdConfig{lr})) {
  if (!(lr > 0.0)) raise(ErrorKind::Config, "learning rate must be positive");
  if (kind == OptimizerKind::Adam) impl_ = Adam(AdamConfig{lr});
  else if (kind == OptimizerKind::Lbfgs) impl_ = Lbfgs(LbfgsConfig{lr});
}

void Optimizer::step(Vector& x, double& f, Vector& g, const Objective& objective) {
  if (auto* l = std::get_if<Lbfgs>(&impl_)) {
    l->step(x, f, g, objective);
    return;
  }
  std::span<double> px(x.data(), static_cast<std::size_t>(x.size()));
  std::span<const double> pg(g.data(), static_cast<std::size_t>(g.size()));
  if (auto* s = std::get_if<Sgd>(&impl_)) s->step(px, pg);
  else std::get<Adam>(impl_).step(px, pg);
  f = objective(x, g);
}

double exponential_decay(double lr0, double decay, int epoch) {
  return lr0 * std::pow(decay, static_cast<double>(epoch));
}

}  // namespace physopt
