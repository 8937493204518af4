// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "physopt/dataset.hpp"
#include "physopt/error.hpp"

namespace physopt {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::FiniteDifference: return "finite_difference";
    case Provenance::Splitting: return "splitting";
  }
  return "unknown";
}

GridSpec default_grid(Family family) {
  GridSpec g;
  switch (family) {
    case Family::Helmholtz1d:
      g.fine_nx = 256;
      g.stride_x = 4;
      break;
    case Family::Poisson1d:
      g.fine_nx = 64;
      g.stride_x = 1;
      break;
    case Family::Nlrd1dt:
      g.fine_nx = 256;
      g.stride_x = 4;
      g.periodic_x = true;
      g.fine_nt = 100;
      g.stride_t = 4;
      g.t_end = 1.0;
      break;
  }
  return g;
}

Vector fine_x(const GridSpec& g) {
  Vector x(g.fine_nx);
  const double denom = g.periodic_x ? g.fine_nx : g.fine_nx - 1;
  for (int j = 0; j < g.fine_nx; ++j) x[j] = j / denom;
  return x;
}

Vector fine_t(const GridSpec& g) {
  Vector t(g.fine_nt);
  if (g.fine_nt == 1) {
    t[0] = 0.0;
    return t;
  }
  for (int n = 0; n < g.fine_nt; ++n) t[n] = g.t_end * n / (g.fine_nt - 1);
  return t;
}

Vector coarse_x(const GridSpec& g) {
  const Vector f = fine_x(g);
  Vector x(g.nx());
  for (int j = 0; j < g.nx(); ++j) x[j] = f[j * g.stride_x];
  return x;
}

Vector coarse_t(const GridSpec& g) {
  const Vector f = fine_t(g);
  Vector t(g.nt());
  for (int n = 0; n < g.nt(); ++n) t[n] = f[n * g.stride_t];
  return t;
}

PdeInstance instance_from_params(Family family, const PdeParams& params, const GridSpec& grid) {
  switch (family) {
    case Family::Helmholtz1d:
      return make_helmholtz(std::get<HelmholtzParams>(params), coarse_x(grid));
    case Family::Poisson1d:
      return make_poisson(std::get<PoissonParams>(params), coarse_x(grid));
    case Family::Nlrd1dt:
      return make_nlrd(std::get<NlrdParams>(params), coarse_x(grid), coarse_t(grid));
  }
  raise(ErrorKind::UnsupportedFamily, "unknown family");
}

PdeInstance sample_instance(Family family, Rng& rng, const GridSpec& grid) {
  switch (family) {
    case Family::Helmholtz1d: {
      HelmholtzParams p;
      p.omega = rng.uniform(0.5, 50.0);
      p.u0 = rng.normal();
      p.v0 = rng.normal();
      return instance_from_params(family, p, grid);
    }
    case Family::Poisson1d: {
      PoissonParams p;
      for (double& a : p.a) a = rng.uniform(-100.0, 100.0);
      p.u0 = rng.normal();
      p.v0 = rng.normal();
      return instance_from_params(family, p, grid);
    }
    case Family::Nlrd1dt: {
      NlrdParams p;
      p.nu = rng.uniform(1.0, 5.0);
      p.rho = rng.uniform(-5.0, 5.0);
      return instance_from_params(family, p, grid);
    }
  }
  raise(ErrorKind::UnsupportedFamily, "unknown family");
}

PdeInstance sample_instance(Family family, Rng& rng) {
  return sample_instance(family, rng, default_grid(family));
}

Vector poisson_march(const Vector& x, const Vector& f, double u0, double v0) {
  // Central second difference marched from the two initial conditions:
  // u_{j+1} = 2u_j - u_{j-1} - h^2 f_j, with a Taylor start for u_1.
  const Eigen::Index m = x.size();
  if (f.size() != m) raise(ErrorKind::ShapeMismatch, "forcing and grid sizes differ");
  Vector u(m);
  u[0] = u0;
  if (m == 1) return u;
  const double h = x[1] - x[0];
  u[1] = u0 + h * v0 - 0.5 * h * h * f[0];
  for (Eigen::Index j = 1; j + 1 < m; ++j) {
    const double hj = x[j + 1] - x[j];
    if (std::abs(hj - h) > 1e-12 * std::abs(h))
      raise(ErrorKind::Generation, "finite-difference march needs a uniform grid");
    u[j + 1] = 2.0 * u[j] - u[j - 1] - h * h * f[j];
  }
  return u;
}

namespace {

// Periodic tridiagonal system with constant diagonal d and off-diagonals e,
// solved by the Sherman-Morrison correction of a Thomas sweep.
class CyclicTridiagonal {
 public:
  CyclicTridiagonal(int n, double d, double e) : n_(n), d_(d), e_(e) {
    gamma_ = -d_;
    Vector u = Vector::Zero(n_);
    u[0] = gamma_;
    u[n_ - 1] = e_;
    z_ = thomas(u);
  }

  Vector solve(const Vector& r) const {
    Vector x = thomas(r);
    const double fact = (x[0] + e_ * x[n_ - 1] / gamma_) / (1.0 + z_[0] + e_ * z_[n_ - 1] / gamma_);
    return x - fact * z_;
  }

 private:
  Vector thomas(const Vector& r) const {
    Vector diag = Vector::Constant(n_, d_);
    diag[0] = d_ - gamma_;
    diag[n_ - 1] = d_ - e_ * e_ / gamma_;
    Vector cp(n_), x(n_);
    double beta = diag[0];
    x[0] = r[0] / beta;
    for (int i = 1; i < n_; ++i) {
      cp[i] = e_ / beta;
      beta = diag[i] - e_ * cp[i];
      x[i] = (r[i] - e_ * x[i - 1]) / beta;
    }
    for (int i = n_ - 2; i >= 0; --i) x[i] -= cp[i + 1] * x[i + 1];
    return x;
  }

  int n_;
  double d_, e_, gamma_;
  Vector z_;
};

void logistic_step(Vector& u, double rho, double tau) {
  const double g = std::exp(rho * tau);
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = u[i] * g / (1.0 - u[i] + u[i] * g);
}

}  // namespace

Matrix nlrd_splitting(const NlrdParams& p, const Vector& x, const Vector& t, int substeps) {
  const int nx = static_cast<int>(x.size());
  const int nt = static_cast<int>(t.size());
  if (nx < 3) raise(ErrorKind::Generation, "NLRD grid needs at least 3 points");
  if (substeps < 1) raise(ErrorKind::InvalidSpec, "substeps must be positive");
  const double h = 1.0 / nx;  // periodic grid on [0, 1)
  Matrix frames(nt, nx);
  Vector u(nx);
  for (int j = 0; j < nx; ++j) u[j] = nlrd_initial_profile(x[j]);
  frames.row(0) = u.transpose();
  for (int n = 1; n < nt; ++n) {
    const double tau = (t[n] - t[n - 1]) / substeps;
    const double s = 0.5 * p.nu * tau / (h * h);
    const CyclicTridiagonal implicit(nx, 1.0 + 2.0 * s, -s);
    for (int k = 0; k < substeps; ++k) {
      logistic_step(u, p.rho, 0.5 * tau);
      Vector rhs(nx);
      for (int j = 0; j < nx; ++j) {
        const double left = u[(j + nx - 1) % nx], right = u[(j + 1) % nx];
        rhs[j] = (1.0 - 2.0 * s) * u[j] + s * (left + right);
      }
      u = implicit.solve(rhs);
      logistic_step(u, p.rho, 0.5 * tau);
    }
    if (!u.allFinite())
      raise(ErrorKind::Generation, "NLRD splitting produced non-finite values (nu=" +
                                       std::to_string(p.nu) + ", rho=" + std::to_string(p.rho) + ")");
    frames.row(n) = u.transpose();
  }
  return frames;
}

SolutionField solve_reference(const PdeInstance& inst, const GridSpec& grid,
                              const ReferenceOptions& opts) {
  SolutionField out;
  out.nx = grid.nx();
  out.nt = grid.nt();
  if (inst.num_points() != out.nx * out.nt)
    raise(ErrorKind::ShapeMismatch, "instance grid does not match the grid spec");
  switch (inst.family) {
    case Family::Helmholtz1d: {
      const Vector fine = analytic_solution(inst, fine_x(grid));
      out.values.resize(out.nx);
      for (int j = 0; j < out.nx; ++j) out.values[j] = fine[j * grid.stride_x];
      out.provenance = Provenance::Analytic;
      break;
    }
    case Family::Poisson1d: {
      const auto& p = std::get<PoissonParams>(inst.params);
      const Vector xf = fine_x(grid);
      Vector f(xf.size());
      for (Eigen::Index j = 0; j < xf.size(); ++j) f[j] = poisson_forcing(p, xf[j]);
      const Vector fine = poisson_march(xf, f, p.u0, p.v0);
      out.values.resize(out.nx);
      for (int j = 0; j < out.nx; ++j) out.values[j] = fine[j * grid.stride_x];
      out.provenance = Provenance::FiniteDifference;
      break;
    }
    case Family::Nlrd1dt: {
      const auto& p = std::get<NlrdParams>(inst.params);
      const Matrix frames = nlrd_splitting(p, fine_x(grid), fine_t(grid), opts.substeps_per_frame);
      out.values.resize(out.nx * out.nt);
      for (int n = 0; n < out.nt; ++n)
        for (int j = 0; j < out.nx; ++j)
          out.values[n * out.nx + j] = frames(n * grid.stride_t, j * grid.stride_x);
      out.provenance = Provenance::Splitting;
      break;
    }
  }
  if (!out.values.allFinite()) raise(ErrorKind::Generation, "reference solution not finite");
  return out;
}

}  // namespace physopt
