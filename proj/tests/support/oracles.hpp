// Independent reference implementations used only by the tests.

#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "physopt/types.hpp"

namespace oracle {

using physopt::Matrix;
using physopt::Vector;

// Cox-de Boor recursion for N_{i,p}(tau), with the last nonempty span closed
// on the right.
double cox_de_boor(int i, int p, const std::vector<double>& t, double tau);
// k-th derivative through the recursive derivative formula.
double cox_de_boor_derivative(int i, int p, int k, const std::vector<double>& t, double tau);

std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x);

// Dominant eigenpair by power iteration, then the full spectrum by deflation.
Vector power_iteration_spectrum(const Matrix& A, int iterations = 20000);

// Classical RK4 on u'' = -omega^2 u.
double helmholtz_rk4(double omega, double u0, double v0, double x, int steps);

// Central differences of a scalar function.
Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h);

double relative_error(const Vector& a, const Vector& b);

// Half-widths of the level set {f = f(center) + level} along the two grid
// axes through the center node, by linear interpolation between nodes.
// values(i, j) is sampled at (alphas[i], betas[j]). Returns {a, b}, or a
// negative entry when the level is not crossed inside the grid.
std::pair<double, double> level_set_half_widths(const Matrix& values, const Vector& alphas,
                                                const Vector& betas, double level);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
