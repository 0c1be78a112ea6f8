#pragma once

#include <cstdint>

namespace dyadrisk {

// Regularized incomplete gamma P(a,x) and Q(a,x)=1-P(a,x), relative
// tolerance 1e-12 (series for x < a+1, Lentz continued fraction otherwise).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi-squared upper tail P(X >= x) with df degrees of freedom.
double chi2_sf(double x, double df);

// Regularized incomplete beta I_x(a,b).
double incbeta(double a, double b, double x);

// Two-sided p-value for a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// 2 * P(X <= k) for X ~ Binomial(n, 1/2), capped at 1. Exact for the small
// n used by the McNemar exact branch.
double binom_half_two_sided(std::int64_t n, std::int64_t k);

}  // namespace dyadrisk
