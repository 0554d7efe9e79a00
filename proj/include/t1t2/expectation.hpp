#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/parallel.hpp"
#include "t1t2/quadrature.hpp"
#include "t1t2/rng.hpp"

namespace t1t2 {

enum class DurationMethod { quadrature, monte_carlo };

struct DurationReport {
  double expected_failures = 0.0;
  double expected_duration = 0.0;
  DurationMethod method = DurationMethod::quadrature;
  std::optional<double> mc_std_error;           // of the duration
  std::optional<double> failures_std_error;     // of the failure count
  double quadrature_error = 0.0;
  // Conditional failure-count sum evaluated at t = E[T*] (quadrature only).
  std::optional<double> conditional_failures;
};

// sum_{r=m}^{n} r C(n,r) F(t)^r (1-F(t))^(n-r): the failure-count mean with
// the termination time held fixed at t.
inline double expected_failures_given_time(double t, const CensoringScheme& scheme,
                                           const WeibullParams& p) {
  if (!(t > 0.0)) throw std::domain_error("expected_failures_given_time: t must be positive");
  const double log_s = weibull_logsf(t, p);
  const double log_f = std::log(-std::expm1(log_s));
  if (!std::isfinite(log_f)) return 0.0;
  const int n = scheme.n;
  double acc = 0.0;
  for (int r = scheme.m; r <= n; ++r) {
    const double b = r == n ? 0.0 : (n - r) * log_s;
    acc += r * std::exp(log_binomial(n, r) + r * log_f + b);
  }
  return acc;
}

struct ExpectationOptions {
  // Integrate the printed product (1 - F_{n:n}(x))(1 - F_{m:n}(x + S))
  // instead of the joint survival of the two order statistics.
  bool product_integrand = false;
  double tol = 1e-11;
};

// P(T* > x) = P(X_{n:n} > x, X_{m:n} > x - S). Beyond S, with y = x - S,
// this is sum_{j<m} C(n,j) F(y)^j [(1-F(y))^(n-j) - (F(x)-F(y))^(n-j)]:
// fewer than m failures by y, minus the part where everything fails by x.
inline double termination_sf(double x, const CensoringScheme& scheme, const WeibullParams& p) {
  const int n = scheme.n;
  if (!(x > 0.0)) return 1.0;
  const double y = x - scheme.S;
  if (y <= 0.0) return order_stat_sf(x, n, n, p);
  const double log_sy = weibull_logsf(y, p);
  const double log_fy = std::log(-std::expm1(log_sy));
  // sf(x)/sf(y) in (0, 1]
  const double ratio = std::exp(weibull_logsf(x, p) - log_sy);
  double acc = 0.0;
  for (int j = 0; j < scheme.m; ++j) {
    if (j > 0 && !std::isfinite(log_fy)) break;
    const int k = n - j;
    // a^k - b^k with a = 1-F(y), b = a - sf(x), kept relative to a^k
    const double rel = ratio >= 1.0 ? 1.0 : -std::expm1(k * std::log1p(-ratio));
    const double lf = j > 0 ? j * log_fy : 0.0;
    acc += std::exp(log_binomial(n, j) + lf + k * log_sy) * rel;
  }
  return std::clamp(acc, 0.0, 1.0);
}

// Unconditional E[K]. Given X_{m:n} = t the remaining n - m units fail in
// (t, t + S] independently with probability q(t) = 1 - sf(t + S)/sf(t), so
// E[K] = m + (n - m) E[q(X_{m:n})].
inline double expected_failures(const CensoringScheme& scheme, const WeibullParams& p, double tol = 1e-11) {
  const int n = scheme.n;
  const int m = scheme.m;
  if (m == n) return n;
  if (scheme.S == 0.0) return m;
  const auto integrand = [&](double t) {
    if (!(t > 0.0)) return 0.0;
    const double q = -std::expm1(weibull_logsf(t + scheme.S, p) - weibull_logsf(t, p));
    return q * order_stat_pdf(t, m, n, p);
  };
  const double med = weibull_quantile(0.5, p);
  const auto r = quad::integrate_half_line(integrand, {med, weibull_quantile(1.0 - 1.0 / (4.0 * n), p)}, tol);
  return m + (n - m) * std::clamp(r.value, 0.0, 1.0);
}

// E[T*] = int_0^inf P(T* > x) dx with T* = min(X_{n:n}, X_{m:n} + S).
inline DurationReport expected_duration(const CensoringScheme& scheme, const WeibullParams& p,
                                        const ExpectationOptions& opt = {}) {
  const int n = scheme.n;
  const int m = scheme.m;
  const double S = scheme.S;
  const auto integrand = [&](double x) {
    if (!(x > 0.0)) return 1.0;
    if (!opt.product_integrand) return termination_sf(x, scheme, p);
    return order_stat_sf(x, n, n, p) * order_stat_sf(x + S, m, n, p);
  };
  std::vector<double> breaks{weibull_quantile(0.5, p), weibull_quantile(1.0 - 1.0 / (4.0 * n), p)};
  if (S > 0.0) breaks.push_back(S);
  if (!opt.product_integrand && S > 0.0) breaks.push_back(S + weibull_quantile(0.5, p));
  const auto r = quad::integrate_half_line(integrand, breaks, opt.tol);
  if (r.error_estimate > 1e-6 * std::max(1.0, std::abs(r.value))) {
    throw convergence_error("expected_duration: quadrature did not reach tolerance", r.value);
  }
  DurationReport out;
  out.expected_duration = r.value;
  out.quadrature_error = r.error_estimate;
  out.method = DurationMethod::quadrature;
  out.expected_failures = expected_failures(scheme, p, opt.tol);
  out.conditional_failures = expected_failures_given_time(r.value, scheme, p);
  return out;
}

// One simulated test: returns (T*, K).
inline std::pair<double, int> simulate_termination(const CensoringScheme& scheme,
                                                   const WeibullParams& p, rng& gen,
                                                   std::vector<double>& buf) {
  buf.resize(scheme.n);
  for (auto& x : buf) x = weibull_quantile(gen.uniform(), p);
  std::sort(buf.begin(), buf.end());
  const double U = buf[scheme.m - 1] + scheme.S;
  if (buf.back() <= U) return {buf.back(), scheme.n};
  const auto k = std::upper_bound(buf.begin(), buf.end(), U) - buf.begin();
  return {U, static_cast<int>(k)};
}

// Monte Carlo E[T*] and unconditional E[K]. Replication i uses the sub-seed
// derive_seed(seed, i), so the estimate is identical for any worker count.
inline DurationReport expected_duration_mc(const CensoringScheme& scheme, const WeibullParams& p,
                                           std::size_t replications, std::uint64_t seed,
                                           unsigned workers = 1) {
  if (replications < 1) throw std::invalid_argument("expected_duration_mc: replications >= 1");
  std::vector<double> t(replications);
  std::vector<int> k(replications);
  parallel_for(replications, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf;
    for (std::size_t i = begin; i < end; ++i) {
      rng gen(derive_seed(seed, i));
      const auto [ti, ki] = simulate_termination(scheme, p, gen, buf);
      t[i] = ti;
      k[i] = ki;
    }
  });
  const double nr = static_cast<double>(replications);
  double st = 0.0, sk = 0.0;
  for (std::size_t i = 0; i < replications; ++i) {
    st += t[i];
    sk += k[i];
  }
  const double mt = st / nr, mk = sk / nr;
  double vt = 0.0, vk = 0.0;
  for (std::size_t i = 0; i < replications; ++i) {
    vt += (t[i] - mt) * (t[i] - mt);
    vk += (k[i] - mk) * (k[i] - mk);
  }
  const double denom = replications > 1 ? nr - 1.0 : 1.0;
  DurationReport out;
  out.method = DurationMethod::monte_carlo;
  out.expected_duration = mt;
  out.expected_failures = mk;
  out.mc_std_error = std::sqrt(vt / denom / nr);
  out.failures_std_error = std::sqrt(vk / denom / nr);
  return out;
}

// Empirical distribution of the failure count K over counts m..n.
inline std::vector<std::size_t> failure_count_histogram(const CensoringScheme& scheme,
                                                        const WeibullParams& p,
                                                        std::size_t replications,
                                                        std::uint64_t seed) {
  std::vector<std::size_t> hist(scheme.n - scheme.m + 1, 0);
  std::vector<double> buf;
  for (std::size_t i = 0; i < replications; ++i) {
    rng gen(derive_seed(seed, i));
    ++hist[simulate_termination(scheme, p, gen, buf).second - scheme.m];
  }
  return hist;
}

inline double chi_square_sf(double stat, int dof) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), stat));
}

// Pearson chi-square test of homogeneity for two count vectors over the same
// categories. Empty categories are skipped. Returns (statistic, dof).
inline std::pair<double, int> chi_square_homogeneity(const std::vector<std::size_t>& a,
                                                     const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_homogeneity: size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    ++cells;
    const double ea = col * na / (na + nb);
    const double eb = col * nb / (na + nb);
    stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  return {stat, std::max(cells - 1, 1)};
}

struct ScaleInvarianceReport {
  double alpha;
  double duration;
  double scaled_duration;
  double ratio;
  double ratio_error;           // |ratio - alpha|
  double expected_failures;     // MC mean K, unscaled
  double scaled_expected_failures;
  double failures_std_error;
  double chi_square;
  int chi_square_dof;
  double chi_square_p;
  bool duration_pass;
  bool failures_pass;

  bool pass() const noexcept { return duration_pass && failures_pass; }
};

// Scaling every lifetime by alpha maps Weibull(g, d) to Weibull(g, d/alpha^g);
// with S scaled too, K keeps its distribution and T* scales by alpha.
inline ScaleInvarianceReport check_scale_invariance(const CensoringScheme& scheme,
                                                    const WeibullParams& p, double alpha,
                                                    std::size_t replications = 20000,
                                                    std::uint64_t seed = 1,
                                                    double ratio_tol = 1e-6) {
  if (!(alpha > 0.0)) throw std::invalid_argument("check_scale_invariance: alpha must be positive");
  const CensoringScheme scaled_scheme(scheme.n, scheme.m, alpha * scheme.S);
  const WeibullParams scaled_p(p.gamma, p.delta / std::pow(alpha, p.gamma));

  ScaleInvarianceReport rep{};
  rep.alpha = alpha;
  rep.duration = expected_duration(scheme, p).expected_duration;
  rep.scaled_duration = expected_duration(scaled_scheme, scaled_p).expected_duration;
  rep.ratio = rep.scaled_duration / rep.duration;
  rep.ratio_error = std::abs(rep.ratio - alpha);
  rep.duration_pass = rep.ratio_error < ratio_tol;

  // Paired seeds: the same uniforms drive both configurations.
  const auto h0 = failure_count_histogram(scheme, p, replications, seed);
  const auto h1 = failure_count_histogram(scaled_scheme, scaled_p, replications, seed);
  double s0 = 0.0, s1 = 0.0, q0 = 0.0;
  for (std::size_t i = 0; i < h0.size(); ++i) {
    const double k = scheme.m + static_cast<double>(i);
    s0 += k * h0[i];
    s1 += k * h1[i];
    q0 += k * k * h0[i];
  }
  const double nr = static_cast<double>(replications);
  rep.expected_failures = s0 / nr;
  rep.scaled_expected_failures = s1 / nr;
  rep.failures_std_error = std::sqrt(std::max(q0 / nr - rep.expected_failures * rep.expected_failures, 0.0) / nr);
  const auto [chi, dof] = chi_square_homogeneity(h0, h1);
  rep.chi_square = chi;
  rep.chi_square_dof = dof;
  rep.chi_square_p = chi_square_sf(chi, dof);
  rep.failures_pass = rep.chi_square_p > 0.01 &&
                      std::abs(rep.expected_failures - rep.scaled_expected_failures) <=
                          3.0 * std::max(rep.failures_std_error, 1e-12) * std::sqrt(2.0);
  return rep;
}

} // namespace t1t2
