#pragma once

#include <functional>

namespace colat {

// log B(a,b) = lgamma(a) + lgamma(b) - lgamma(a+b)
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a,b), continued fraction (Lentz),
// absolute error well below 1e-12 over the parameter ranges used here.
double regularized_incomplete_beta(double x, double a, double b);

// Student-t distribution.
double student_t_cdf(double x, double df);
// Two-sided tail P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

// Standard normal CDF / quantile. The quantile uses Acklam's rational
// approximation polished with one Halley step, giving ~1e-15 accuracy.
double normal_cdf(double x);
double normal_quantile(double p);

// log C(n, k) via lgamma.
double log_choose(double n, double k);

// Adaptive Simpson on [a, b] with a relative tolerance. Throws
// Error("IntegrationFailure", numeric) if the recursion depth is exhausted
// before the tolerance is met -- never silently truncates.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, int max_depth = 60);

}  // namespace colat
