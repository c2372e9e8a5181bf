#pragma once

#include <span>

namespace recon {

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double mean_difference = 0.0;
  std::size_t n = 0;
};

/// Two-sided paired t-test on a[i] - b[i] with n - 1 degrees of freedom.
/// All-zero differences give t = 0, p = 1.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees
/// of freedom, through the regularized incomplete beta function.
double student_t_two_sided_p(double t, double df);

}  // namespace recon
