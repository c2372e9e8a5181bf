#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "recon/error.hpp"
#include "recon/rng.hpp"
#include "recon/stats.hpp"

namespace recon {
namespace {

TEST(PairedTTest, FourDifferencesFixture) {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b(4, 0.0);
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, 3.872983346207417, 1e-9);  // sqrt(15)
  EXPECT_NEAR(r.p, oracle::t_two_sided_p(r.t, 3.0), 1e-9);
  EXPECT_NEAR(r.p, 0.0305, 1e-3);
  EXPECT_EQ(r.n, 4u);
  EXPECT_NEAR(r.mean_difference, 0.25, 1e-15);
}

TEST(PairedTTest, SignFollowsDirection) {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b(4, 0.0);
  const auto r = paired_t_test(b, a);
  EXPECT_LT(r.t, 0.0);
  EXPECT_NEAR(r.p, paired_t_test(a, b).p, 1e-15);
}

TEST(PairedTTest, IdenticalSamples) {
  const std::vector<double> a{0.5, 0.1, 0.9};
  const auto r = paired_t_test(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(PairedTTest, ConstantShiftDiverges) {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{0.0, 1.0, 2.0};
  const auto r = paired_t_test(a, b);
  EXPECT_TRUE(std::isinf(r.t));
  EXPECT_EQ(r.p, 0.0);
}

TEST(PairedTTest, Errors) {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, three{1.0, 2.0, 3.0}, bad{1.0, NAN};
  EXPECT_THROW(paired_t_test(two, three), DimensionError);
  EXPECT_THROW(paired_t_test(one, one), ConfigError);
  EXPECT_THROW(paired_t_test(two, bad), NonFiniteError);
  EXPECT_THROW(student_t_two_sided_p(1.0, 0.0), ConfigError);
}

TEST(StudentT, KnownQuantiles) {
  // Two-sided 5% critical values from standard tables.
  EXPECT_NEAR(student_t_two_sided_p(12.706204736, 1), 0.05, 1e-8);
  EXPECT_NEAR(student_t_two_sided_p(2.262157163, 9), 0.05, 1e-8);
  EXPECT_NEAR(student_t_two_sided_p(0.0, 5), 1.0, 1e-15);
  // One degree of freedom is Cauchy: p = 1 - 2 atan(t) / pi.
  EXPECT_NEAR(student_t_two_sided_p(3.0, 1), 1.0 - 2.0 * std::atan(3.0) / M_PI, 1e-14);
}

// Property: the incomplete-beta tail matches Simpson integration of the
// density and the statistic matches the textbook formula.
TEST(PairedTTestProperty, MatchesNumericalIntegration) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(30);
    std::vector<double> a(n), b(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(0, 1);
      b[i] = a[i] - rng.uniform(-0.2, 0.3);
      d[i] = a[i] - b[i];
    }
    const auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.t, oracle::paired_t(d), 1e-9 * std::max(1.0, std::abs(r.t)));
    EXPECT_NEAR(r.p, oracle::t_two_sided_p(r.t, static_cast<double>(n - 1), 20000), 1e-7);
  }
}

}  // namespace
}  // namespace recon
