#pragma once

// Independent reference values for the acceptance and unit tests: 50-digit
// closed forms of the kernel functions, derived from their integral
// definitions, and brute-force proximal oracles.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gsc/models.hpp"

namespace gsc::oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

Real omega_bar_bar(double nu, double tau);
// int_0^1 omega_bar_bar(s tau) ds
Real omega_bar(double nu, double tau);
// int_0^1 (1 - s) omega_bar_bar(s tau) ds
Real omega(double nu, double tau);
// int_0^1 e^{-s t} ds for nu = 2, int_0^1 (1 - s t)^{2/(nu-2)} ds otherwise
Real kappa_lower(double nu, double t);
Real kappa_upper(double nu, double t);
// nu in [2, 3]
Real r_nu(double nu, double t);

double rel_err(double got, const Real& want);

// argmin_z weight |z| + (z - u)^2 / (2 step) by a grid scan and a bisection
// polish on one-sided derivatives.
double soft_threshold_bruteforce(double u, double weight, double step);
// argmin_z g (z - x) + h/2 (z - x)^2 + weight |z|, same method.
double l1_coordinate_bruteforce(double g, double h, double x, double weight);
// Euclidean projection onto the unit simplex by enumerating every support set
// (p <= 12).
Vec simplex_projection_bruteforce(const Vec& u);

}  // namespace gsc::oracle
