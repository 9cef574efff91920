#pragma once

#include <cstddef>
#include <span>

namespace eea::stats {

double pearson_r(std::span<const double> x, std::span<const double> y);

// Two-sided p-value for H0: rho = 0 via t = r sqrt((n-2)/(1-r^2)).
double pearson_p_value(double r, std::size_t n);

// Regularized incomplete beta I_x(a, b); continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// P(|T_nu| >= |t|) for Student's t.
double student_t_two_sided(double t, double nu);

}  // namespace eea::stats
