#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "t1t2/expectation.hpp"

using namespace t1t2;

TEST(ExpectedFailuresGivenTime, Limits) {
  const CensoringScheme sc(6, 2, 0.5);
  const WeibullParams p{1.5, 2.0};
  EXPECT_NEAR(expected_failures_given_time(1e3, sc, p), 6.0, 1e-12);
  EXPECT_NEAR(expected_failures_given_time(1e-8, {6, 1, 0.5}, p), 0.0, 1e-9);
  EXPECT_THROW(expected_failures_given_time(0.0, sc, p), std::domain_error);
}

TEST(ExpectedFailuresGivenTime, HandEnumeration) {
  // F(t) = 0.5 for the unit exponential at t = ln 2.
  EXPECT_NEAR(expected_failures_given_time(std::log(2.0), {2, 1, 0.0}, {1.0, 1.0}), 1.0, 1e-14);
}

TEST(ExpectedFailuresGivenTime, NondecreasingInTime) {
  const CensoringScheme sc(10, 4, 0.3);
  double prev = 0.0;
  for (double t = 0.01; t < 3.0; t += 0.01) {
    const double v = expected_failures_given_time(t, sc, {1.5, 2.0});
    EXPECT_GE(v, prev - 1e-14);
    prev = v;
  }
}

TEST(ExpectedDuration, SingleUnitIsItsLifetime) {
  for (double S : {0.0, 0.3, 5.0}) {
    const auto r = expected_duration({1, 1, S}, {1.0, 1.0});
    EXPECT_NEAR(r.expected_duration, 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(r.expected_failures, 1.0);
    EXPECT_EQ(r.method, DurationMethod::quadrature);
  }
}

TEST(ExpectedDuration, MaximumOfTwoExponentials) {
  EXPECT_NEAR(expected_duration({2, 2, 0.0}, {1.0, 1.0}).expected_duration, 1.5, 1e-9);
  // Type II: T* = X_(m). For exponentials E[X_(m:n)] = sum_{j=0}^{m-1} 1/(n-j).
  double h = 0.0;
  for (int j = 0; j < 3; ++j) h += 1.0 / (7 - j);
  EXPECT_NEAR(expected_duration({7, 3, 0.0}, {1.0, 1.0}).expected_duration, h, 1e-9);
}

// P(T* > x) by direct trinomial enumeration over (#failed by x - S, #failed in (x - S, x]).
TEST(ExpectedDuration, SurvivalMatchesEnumeration) {
  const CensoringScheme sc(6, 3, 0.4);
  const WeibullParams p{1.5, 2.0};
  for (double x : {0.2, 0.45, 0.8, 1.3}) {
    const double y = x - sc.S;
    const double Fx = oracle::weibull_cdf(x, 1.5, 2.0);
    const double Fy = y > 0 ? oracle::weibull_cdf(y, 1.5, 2.0) : 0.0;
    double ref = 0.0;
    for (int a = 0; a <= 6; ++a) {
      for (int b = 0; a + b <= 6; ++b) {
        const int c = 6 - a - b;
        // T* > x: fewer than m failed by y, and someone still alive at x.
        if (a >= sc.m || c == 0) continue;
        ref += oracle::binomial(6, a) * oracle::binomial(6 - a, b) * std::pow(Fy, a) * std::pow(Fx - Fy, b) *
               std::pow(1.0 - Fx, c);
      }
    }
    EXPECT_NEAR(termination_sf(x, sc, p), ref, 1e-13) << x;
  }
}

TEST(ExpectedDuration, AgreesWithSimulation) {
  const CensoringScheme sc(10, 5, 0.3);
  const WeibullParams p{1.5, 2.0};
  const auto q = expected_duration(sc, p);
  // Independent simulation straight from the termination rule.
  std::mt19937_64 eng(8);
  std::weibull_distribution<double> wd(1.5, std::pow(2.0, -1.0 / 1.5));
  constexpr int reps = 1000000;
  double st = 0.0, st2 = 0.0, sk = 0.0, sk2 = 0.0;
  std::vector<double> x(10);
  for (int k = 0; k < reps; ++k) {
    for (auto& v : x) v = wd(eng);
    std::sort(x.begin(), x.end());
    const double U = x[4] + 0.3;
    const double t = std::min(x.back(), U);
    const double kk = static_cast<double>(std::upper_bound(x.begin(), x.end(), U) - x.begin());
    st += t;
    st2 += t * t;
    sk += kk;
    sk2 += kk * kk;
  }
  const double mt = st / reps, mk = sk / reps;
  const double se_t = std::sqrt((st2 / reps - mt * mt) / reps);
  const double se_k = std::sqrt((sk2 / reps - mk * mk) / reps);
  EXPECT_NEAR(q.expected_duration, mt, 3.0 * se_t);
  EXPECT_NEAR(q.expected_failures, mk, 3.0 * se_k);
  EXPECT_GE(q.expected_failures, sc.m);
  EXPECT_LE(q.expected_failures, sc.n);
  ASSERT_TRUE(q.conditional_failures);
  EXPECT_NEAR(*q.conditional_failures, expected_failures_given_time(q.expected_duration, sc, p), 1e-15);

  const auto mc = expected_duration_mc(sc, p, 200000, 3);
  EXPECT_NEAR(mc.expected_duration, q.expected_duration, 3.0 * *mc.mc_std_error);
  EXPECT_NEAR(mc.expected_failures, q.expected_failures, 3.0 * *mc.failures_std_error);
}

TEST(ExpectedDuration, MonotoneInSlackAndFailureCount) {
  const WeibullParams p{1.5, 2.0};
  for (int m = 1; m <= 8; ++m) {
    double prev = 0.0;
    for (double S : {0.0, 0.1, 0.2, 0.5, 1.0}) {
      const double e = expected_duration({8, m, S}, p).expected_duration;
      EXPECT_GE(e, prev - 1e-10);
      prev = e;
      if (m > 1) {
        EXPECT_GE(e, expected_duration({8, m - 1, S}, p).expected_duration - 1e-10);
      }
    }
  }
}

TEST(ExpectedDuration, PrintedProductIsDifferent) {
  // The product of marginal survivals ignores the dependence of the two
  // order statistics and undercounts the single-unit case.
  ExpectationOptions opt;
  opt.product_integrand = true;
  EXPECT_NEAR(expected_duration({1, 1, 0.0}, {1.0, 1.0}, opt).expected_duration, 0.5, 1e-9);
}

TEST(ExpectedDurationMc, DeterministicAndWorkerIndependent) {
  const CensoringScheme sc(10, 5, 0.3);
  const WeibullParams p{1.5, 2.0};
  const auto a = expected_duration_mc(sc, p, 5000, 42, 1);
  const auto b = expected_duration_mc(sc, p, 5000, 42, 4);
  EXPECT_EQ(a.expected_duration, b.expected_duration);
  EXPECT_EQ(a.expected_failures, b.expected_failures);
  EXPECT_EQ(a.method, DurationMethod::monte_carlo);
  const auto complete = expected_duration_mc({6, 6, 0.0}, p, 1000, 1);
  EXPECT_EQ(complete.expected_failures, 6.0);
  EXPECT_THROW(expected_duration_mc(sc, p, 0, 1), std::invalid_argument);
}

TEST(ScaleInvariance, IdentityScaling) {
  const auto rep = check_scale_invariance({10, 5, 0.3}, {1.5, 2.0}, 1.0, 5000, 9);
  EXPECT_DOUBLE_EQ(rep.ratio, 1.0);
  EXPECT_EQ(rep.expected_failures, rep.scaled_expected_failures);
  EXPECT_TRUE(rep.pass());
}

TEST(ScaleInvariance, DurationScalesAndCountIsInvariant) {
  for (double a : {0.1, 0.5, 2.5, 10.0}) {
    const auto rep = check_scale_invariance({10, 5, 0.3}, {1.5, 2.0}, a, 20000, 17);
    EXPECT_LT(rep.ratio_error, 1e-6) << a;
    EXPECT_LT(std::abs(rep.expected_failures - rep.scaled_expected_failures), 3.0 * rep.failures_std_error + 1e-12);
    EXPECT_TRUE(rep.pass()) << a;
  }
  EXPECT_THROW(check_scale_invariance({10, 5, 0.3}, {1.5, 2.0}, 0.0), std::invalid_argument);
}

TEST(ChiSquare, HomogeneityOfIdenticalCounts) {
  const std::vector<std::size_t> h{10, 20, 30};
  const auto [chi, dof] = chi_square_homogeneity(h, h);
  EXPECT_EQ(chi, 0.0);
  EXPECT_EQ(dof, 2);
  EXPECT_NEAR(chi_square_sf(3.841458820694124, 1), 0.05, 1e-9);
}
