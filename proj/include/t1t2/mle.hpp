#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"
#include "t1t2/quadrature.hpp"

namespace t1t2 {

// Symmetric 2x2 matrix in (gamma, delta) order.
struct Matrix2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double det() const noexcept { return a11 * a22 - a12 * a12; }

  bool positive_definite() const noexcept { return a11 > 0.0 && det() > 0.0; }

  Matrix2 inverse() const {
    const double d = det();
    if (!(d != 0.0) || !std::isfinite(d)) throw std::domain_error("Matrix2: singular matrix");
    return {a22 / d, -a12 / d, a11 / d};
  }
};

struct Interval {
  double lower;
  double upper;

  double length() const noexcept { return upper - lower; }
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

struct Score {
  double d_gamma;
  double d_delta;
};

// Gradient of the log-likelihood:
//   (w/g + sum log x - d P,  w/d - Q).
inline Score score(const CensoredSample& s, const WeibullParams& p) {
  const auto suf = log_likelihood_sufficients(s, p.gamma);
  return {suf.w / p.gamma + suf.sum_log - p.delta * suf.P, suf.w / p.delta - suf.Q};
}

// Negative Hessian of the log-likelihood, from analytic second derivatives.
inline Matrix2 observed_information(const CensoredSample& s, const WeibullParams& p) {
  const auto suf = log_likelihood_sufficients(s, p.gamma);
  const double w = suf.w;
  return {w / (p.gamma * p.gamma) + p.delta * weighted_log_square(s, p.gamma), suf.P,
          w / (p.delta * p.delta)};
}

// Upper standard normal quantile z_{1-alpha/2}.
inline double normal_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

struct MleConfig {
  double gamma_init = 1.0;
  double tol = 1e-8;
  int max_iter = 500;
  double alpha = 0.05;
  // Truncate negative lower ACI bounds at zero.
  bool clip_lower = false;
};

struct MleResult {
  WeibullParams params{1.0, 1.0};
  int iterations = 0;
  bool converged = false;
  bool damped = false;
  double loglik = 0.0;
  Matrix2 observed_info;
  // Empty when the observed information is not positive definite.
  std::optional<Interval> aci_gamma;
  std::optional<Interval> aci_delta;
  double se_gamma = 0.0;
  double se_delta = 0.0;
};

// delta that maximizes the likelihood for fixed gamma: w / Q(gamma).
inline double profile_delta(const CensoredSample& s, double gamma) {
  const auto suf = log_likelihood_sufficients(s, gamma);
  return suf.w / suf.Q;
}

// u(gamma) = w / (v(gamma) P(gamma) - sum log x). Its fixed point is the
// MLE of gamma. Returns NaN where the denominator is not positive.
inline double profile_update(const CensoredSample& s, double gamma) {
  const auto suf = log_likelihood_sufficients(s, gamma);
  const double denom = suf.w / suf.Q * suf.P - suf.sum_log;
  if (!(denom > 0.0) || !std::isfinite(denom)) return std::nan("");
  return suf.w / denom;
}

namespace detail {

inline void require_fit_ready(const CensoredSample& s) {
  if (s.r() < 2) throw data_error("fit_mle: at least two failures are required");
  const auto f = s.failures();
  bool distinct = false;
  for (double x : f) {
    if (x != f.front()) {
      distinct = true;
      break;
    }
  }
  // With censored survivors at U != x the profile is still identifiable.
  if (!distinct && !(s.survivors() > 0 && s.U() != f.front())) {
    throw data_error("fit_mle: all observations are equal; shape is not identifiable");
  }
}

} // namespace detail

// Fixed-point maximum likelihood: iterate gamma <- u(gamma) and set
// delta = w / Q(gamma). Switches to the averaged map (g + u(g))/2 once the
// increments alternate in sign five times.
inline MleResult fit_mle(const CensoredSample& s, const MleConfig& cfg = {}) {
  detail::require_fit_ready(s);
  if (!(cfg.gamma_init > 0.0)) throw std::invalid_argument("fit_mle: gamma_init must be positive");
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw std::invalid_argument("fit_mle: bad tolerance");

  MleResult res;
  double g = cfg.gamma_init;
  double prev_step = 0.0;
  int alternations = 0;
  bool damped = false;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    double next = profile_update(s, g);
    if (!std::isfinite(next) || !(next > 0.0)) {
      // u left its domain; fall back to the damped map from a smaller step.
      damped = true;
      next = 0.5 * g;
    } else if (damped) {
      next = 0.5 * (g + next);
    }
    const double step = next - g;
    if (prev_step != 0.0 && (step > 0.0) != (prev_step > 0.0)) {
      if (++alternations >= 5) damped = true;
    }
    prev_step = step;
    g = next;
    res.iterations = k;
    if (std::abs(step) < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.damped = damped;
  res.params = WeibullParams(g, profile_delta(s, g));
  res.loglik = log_likelihood(s, res.params);
  res.observed_info = observed_information(s, res.params);
  if (res.observed_info.positive_definite()) {
    const Matrix2 cov = res.observed_info.inverse();
    const double z = normal_critical(cfg.alpha);
    res.se_gamma = std::sqrt(cov.a11);
    res.se_delta = std::sqrt(cov.a22);
    Interval ig{g - z * res.se_gamma, g + z * res.se_gamma};
    Interval id{res.params.delta - z * res.se_delta, res.params.delta + z * res.se_delta};
    if (cfg.clip_lower) {
      ig.lower = std::max(ig.lower, 0.0);
      id.lower = std::max(id.lower, 0.0);
    }
    res.aci_gamma = ig;
    res.aci_delta = id;
  }
  return res;
}

// Expected information built from the hazard representation:
//   I11 = int (1/g + log t)^2 sum_{i<=r} f_{i:n}(t) dt
//   I12 = (1/d) int (1/g + log t) sum_{i<=r} f_{i:n}(t) dt
//   I22 = (1/d^2) int sum_{i<=r} f_{i:n}(t) dt
// r_limit is the upper index of the order-statistic sum (default: m).
struct FisherInfo {
  double I11;
  double I12;
  double I22;
  int r_limit;

  Matrix2 matrix() const noexcept { return {I11, I12, I22}; }
};

inline FisherInfo fisher_information(int n, int r_limit, const WeibullParams& p,
                                     double tol = 1e-10) {
  if (n < 1 || r_limit < 1 || r_limit > n) {
    throw std::out_of_range("fisher_information: need 1 <= r_limit <= n");
  }
  const auto density_sum = [&](double t) {
    if (!(t > 0.0)) return 0.0;
    double acc = 0.0;
    for (int i = 1; i <= r_limit; ++i) acc += order_stat_pdf(t, i, n, p);
    return acc;
  };
  // Break points around the bulk of the order statistics.
  const std::vector<double> breaks{weibull_quantile(0.5, p), weibull_quantile(0.999, p)};
  const auto moment = [&](auto&& weight) {
    return quad::integrate_half_line(
               [&](double t) {
                 const double d = density_sum(t);
                 return d == 0.0 ? 0.0 : weight(t) * d;
               },
               breaks, tol)
        .value;
  };
  const double ig = 1.0 / p.gamma;
  const double m0 = moment([](double) { return 1.0; });
  const double m1 = moment([&](double t) { return ig + std::log(t); });
  const double m2 = moment([&](double t) {
    const double a = ig + std::log(t);
    return a * a;
  });
  return {m2, m1 / p.delta, m0 / (p.delta * p.delta), r_limit};
}

// I21 evaluated as its own integral, (d/dg log h)(d/dd log h) with the
// factors in the opposite order. Equal to I12 by symmetry of the integrand.
inline double fisher_information_21(int n, int r_limit, const WeibullParams& p,
                                    double tol = 1e-10) {
  if (n < 1 || r_limit < 1 || r_limit > n) {
    throw std::out_of_range("fisher_information: need 1 <= r_limit <= n");
  }
  const std::vector<double> breaks{weibull_quantile(0.5, p), weibull_quantile(0.999, p)};
  return quad::integrate_half_line(
             [&](double t) {
               if (!(t > 0.0)) return 0.0;
               double acc = 0.0;
               for (int i = 1; i <= r_limit; ++i) acc += order_stat_pdf(t, i, n, p);
               return acc == 0.0 ? 0.0 : (1.0 / p.delta) * (1.0 / p.gamma + std::log(t)) * acc;
             },
             breaks, tol)
      .value;
}

} // namespace t1t2
