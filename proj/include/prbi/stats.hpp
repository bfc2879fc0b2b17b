#pragma once

#include <vector>

namespace prbi {

struct mean_var {
  double mean = 0.0;
  double sample_variance = 0.0;  // unbiased (w_p - 1 denominator)
};

mean_var mean_and_sample_variance(const std::vector<double>& xs);

// regularized incomplete beta function I_x(a, b)
double regularized_incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with df degrees of freedom
double student_t_cdf(double t, int df);

// upper-tail critical value: the t with P(T > t) = tail, tail in (0, 0.5)
double student_t_quantile(double tail, int df);

// two-sided one-sample t test of H0: mean == mu at significance alpha.
// Returns true when H0 is accepted. Fewer than 2 samples -> false.
// Zero sample variance degenerates to an exact mean comparison.
bool t_test_accepts(const std::vector<double>& xs, double mu, double alpha);

}  // namespace prbi
