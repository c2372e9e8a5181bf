#include "recon/stats.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "recon/error.hpp"

namespace recon {

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("t distribution needs positive degrees of freedom");
  if (!std::isfinite(t)) return 0.0;
  // P(|T| >= |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("paired_t_test: samples differ in length");
  if (a.size() < 2) throw ConfigError("paired_t_test: need at least two pairs");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw NonFiniteError("paired_t_test: non-finite input");
    mean += a[i] - b[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TTestResult result{0.0, 1.0, mean, n};
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) return result;
    // Constant non-zero differences: the statistic diverges.
    result.t = mean > 0.0 ? INFINITY : -INFINITY;
    result.p = 0.0;
    return result;
  }
  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = student_t_two_sided_p(result.t, static_cast<double>(n - 1));
  return result;
}

}  // namespace recon
