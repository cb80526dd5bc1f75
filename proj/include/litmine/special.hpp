#pragma once

namespace litmine {

/// Digamma function psi(x) for x > 0 (asymptotic series with upward recurrence).
double digamma(double x);

/// Regularized incomplete beta function I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace litmine
