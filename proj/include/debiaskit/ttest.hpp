#pragma once

#include "debiaskit/types.hpp"

#include <span>

namespace debiaskit {

// Regularized incomplete beta I_x(a, b), continued fraction evaluated to a
// relative tolerance of 1e-12.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t_statistic = 0.0;
  long degrees_of_freedom = 0;
  double p_value = 1.0;
  bool significant_at_0_05 = false;
  // Differences had zero variance; p is 0 (nonzero mean) or 1 (zero mean).
  bool degenerate_variance = false;
  double mean_difference = 0.0;
};

// Paired two-sided t-test on after - before.
TTestResult paired_t_test(std::span<const double> before, std::span<const double> after);

// Flattens both matrices row-major and tests the element pairs.
TTestResult paired_t_test(const Matrix& before, const Matrix& after);

}  // namespace debiaskit
