#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "t1t2/rng.hpp"

namespace t1t2 {

// Weibull lifetime model with density g*d*x^(g-1)*exp(-d*x^g).
// delta is rate-like: it carries units of time^(-gamma).
struct WeibullParams {
  double gamma;
  double delta;

  WeibullParams(double shape, double rate) : gamma(shape), delta(rate) {
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
      throw std::invalid_argument("WeibullParams: gamma and delta must be positive, got (" +
                                  std::to_string(shape) + ", " + std::to_string(rate) + ")");
    }
  }
};

// One-parameter Lindley: f(x) = theta^2/(1+theta) * (1+x) * exp(-theta*x).
struct LindleyParams {
  double theta;

  explicit LindleyParams(double t) : theta(t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("LindleyParams: theta must be positive");
    }
  }
};

// Inverse Weibull: F(x) = exp(-delta * x^(-gamma)). If X is inverse Weibull
// then 1/X is Weibull with the same (gamma, delta).
struct InverseWeibullParams {
  double gamma;
  double delta;

  InverseWeibullParams(double shape, double scale) : gamma(shape), delta(scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
      throw std::invalid_argument("InverseWeibullParams: gamma and delta must be positive");
    }
  }
};

namespace detail {

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0)) {
    throw std::domain_error(std::string(what) + ": argument must be positive");
  }
}

inline void require_order_index(int i, int n, const char* what) {
  if (n < 1 || i < 1 || i > n) {
    throw std::out_of_range(std::string(what) + ": order index " + std::to_string(i) +
                            " outside 1.." + std::to_string(n));
  }
}

} // namespace detail

// log C(n, k) via log-gamma; exact enough for n in the thousands.
inline double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// ---------------------------------------------------------------------------
// Weibull

inline double weibull_logpdf(double x, const WeibullParams& p) {
  detail::require_positive(x, "weibull_logpdf");
  return std::log(p.gamma) + std::log(p.delta) + (p.gamma - 1.0) * std::log(x) -
         p.delta * std::pow(x, p.gamma);
}

inline double weibull_pdf(double x, const WeibullParams& p) {
  detail::require_positive(x, "weibull_pdf");
  return std::exp(weibull_logpdf(x, p));
}

inline double weibull_cdf(double x, const WeibullParams& p) {
  if (!(x > 0.0)) return 0.0;
  return -std::expm1(-p.delta * std::pow(x, p.gamma));
}

// log(1 - F(x)), i.e. the log survival function.
inline double weibull_logsf(double x, const WeibullParams& p) {
  if (!(x > 0.0)) return 0.0;
  return -p.delta * std::pow(x, p.gamma);
}

inline double weibull_quantile(double u, const WeibullParams& p) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("weibull_quantile: u must lie in (0, 1)");
  }
  return std::pow(-std::log1p(-u) / p.delta, 1.0 / p.gamma);
}

inline double weibull_hazard(double t, const WeibullParams& p) {
  detail::require_positive(t, "weibull_hazard");
  return p.gamma * p.delta * std::pow(t, p.gamma - 1.0);
}

// Density of the i-th smallest of n i.i.d. Weibull lifetimes,
//   i*C(n,i) f(t) (1-F(t))^(n-i) F(t)^(i-1),
// evaluated in log space.
inline double order_stat_logpdf(double t, int i, int n, const WeibullParams& p) {
  detail::require_order_index(i, n, "order_stat_pdf");
  detail::require_positive(t, "order_stat_pdf");
  const double h = p.delta * std::pow(t, p.gamma);
  double lp = std::log(static_cast<double>(i)) + log_binomial(n, i) + std::log(p.gamma) +
              std::log(p.delta) + (p.gamma - 1.0) * std::log(t) - h * (n - i + 1);
  if (i > 1) lp += (i - 1) * std::log(-std::expm1(-h));
  return lp;
}

inline double order_stat_pdf(double t, int i, int n, const WeibullParams& p) {
  return std::exp(order_stat_logpdf(t, i, n, p));
}

namespace detail {

// Sum_{j=lo}^{hi} C(n,j) F^j (1-F)^(n-j) from log F and log(1-F).
inline double binomial_range(int n, int lo, int hi, double log_f, double log_s) {
  double s = 0.0;
  for (int j = lo; j <= hi; ++j) {
    const double a = j == 0 ? 0.0 : j * log_f;
    const double b = j == n ? 0.0 : (n - j) * log_s;
    s += std::exp(log_binomial(n, j) + a + b);
  }
  return s;
}

} // namespace detail

// P(X_{i:n} <= x) = sum_{j=i}^{n} C(n,j) F^j (1-F)^(n-j).
inline double order_stat_cdf(double x, int i, int n, const WeibullParams& p) {
  detail::require_order_index(i, n, "order_stat_cdf");
  if (!(x > 0.0)) return 0.0;
  const double log_s = weibull_logsf(x, p);
  const double log_f = std::log(-std::expm1(log_s));
  if (!std::isfinite(log_f)) return 0.0;
  const double v = detail::binomial_range(n, i, n, log_f, log_s);
  return v > 1.0 ? 1.0 : v;
}

// P(X_{i:n} > x), summed over the complementary binomial range so that the
// right tail keeps full relative precision.
inline double order_stat_sf(double x, int i, int n, const WeibullParams& p) {
  detail::require_order_index(i, n, "order_stat_sf");
  if (!(x > 0.0)) return 1.0;
  const double log_s = weibull_logsf(x, p);
  const double log_f = std::log(-std::expm1(log_s));
  if (!std::isfinite(log_f)) return 1.0;
  const double v = detail::binomial_range(n, 0, i - 1, log_f, log_s);
  return v > 1.0 ? 1.0 : v;
}

// Deterministic i.i.d. draws by inverse-CDF transform.
inline std::vector<double> sample_weibull(std::size_t count, const WeibullParams& p, rng& gen) {
  std::vector<double> out(count);
  for (auto& x : out) x = weibull_quantile(gen.uniform(), p);
  return out;
}

inline std::vector<double> sample_weibull(std::size_t count, const WeibullParams& p,
                                          std::uint64_t seed) {
  rng gen(seed);
  return sample_weibull(count, p, gen);
}

// ---------------------------------------------------------------------------
// Lindley

inline double lindley_logpdf(double x, const LindleyParams& p) {
  detail::require_positive(x, "lindley_pdf");
  return 2.0 * std::log(p.theta) - std::log1p(p.theta) + std::log1p(x) - p.theta * x;
}

inline double lindley_pdf(double x, const LindleyParams& p) {
  return std::exp(lindley_logpdf(x, p));
}

inline double lindley_cdf(double x, const LindleyParams& p) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double t = p.theta;
  return 1.0 - (1.0 + t * x / (1.0 + t)) * std::exp(-t * x);
}

// ---------------------------------------------------------------------------
// Inverse Weibull

inline double invweibull_logpdf(double x, const InverseWeibullParams& p) {
  detail::require_positive(x, "invweibull_pdf");
  return std::log(p.gamma) + std::log(p.delta) - (p.gamma + 1.0) * std::log(x) -
         p.delta * std::pow(x, -p.gamma);
}

inline double invweibull_pdf(double x, const InverseWeibullParams& p) {
  return std::exp(invweibull_logpdf(x, p));
}

inline double invweibull_cdf(double x, const InverseWeibullParams& p) {
  if (!(x > 0.0)) return 0.0;
  return std::exp(-p.delta * std::pow(x, -p.gamma));
}

} // namespace t1t2
