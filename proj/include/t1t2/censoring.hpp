#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"

namespace t1t2 {

// Design of a Type I-Type II mixture life test: n units on test, at least m
// failures observed, then at most S further time units.
struct CensoringScheme {
  int n;
  int m;
  double S;

  CensoringScheme(int units, int min_failures, double supplementary)
      : n(units), m(min_failures), S(supplementary) {
    if (units < 1 || min_failures < 1 || min_failures > units) {
      throw std::invalid_argument("CensoringScheme: need 1 <= m <= n, got n=" +
                                  std::to_string(units) + " m=" + std::to_string(min_failures));
    }
    if (!(supplementary >= 0.0) || !std::isfinite(supplementary)) {
      throw std::invalid_argument("CensoringScheme: S must be finite and >= 0");
    }
  }

  friend bool operator==(const CensoringScheme&, const CensoringScheme&) = default;
};

// Case I: every unit failed by X_{m:n}+S (complete sample, T* = X_{n:n}).
// Case II: the test stopped at U = X_{m:n}+S with n - r survivors.
enum class CensoringCase { I, II };

inline const char* to_string(CensoringCase c) { return c == CensoringCase::I ? "I" : "II"; }

// Observed data of one test. Immutable once built; construct through
// apply_scheme or make(), both of which validate the invariants.
class CensoredSample {
public:
  static CensoredSample make(CensoringScheme scheme, CensoringCase kind,
                             std::vector<double> failures, double censor_time) {
    CensoredSample s(scheme, kind, std::move(failures), censor_time);
    s.validate();
    return s;
  }

  const CensoringScheme& scheme() const noexcept { return scheme_; }
  CensoringCase kind() const noexcept { return kind_; }
  std::span<const double> failures() const noexcept { return failures_; }
  int r() const noexcept { return static_cast<int>(failures_.size()); }
  int n() const noexcept { return scheme_.n; }
  // X_{m:n} + S. Stored in both cases; only Case II uses it in the likelihood.
  double U() const noexcept { return censor_time_; }
  // Units still running at termination; zero in Case I.
  int survivors() const noexcept { return kind_ == CensoringCase::I ? 0 : n() - r(); }
  // Termination time T*.
  double termination_time() const noexcept {
    return kind_ == CensoringCase::I ? failures_.back() : censor_time_;
  }

  friend bool operator==(const CensoredSample&, const CensoredSample&) = default;

private:
  CensoredSample(CensoringScheme scheme, CensoringCase kind, std::vector<double> failures,
                 double censor_time)
      : scheme_(scheme), kind_(kind), failures_(std::move(failures)), censor_time_(censor_time) {}

  void validate() const {
    const int r = this->r();
    if (r < scheme_.m || r > scheme_.n) {
      throw data_error("CensoredSample: failure count " + std::to_string(r) +
                       " outside [m, n] = [" + std::to_string(scheme_.m) + ", " +
                       std::to_string(scheme_.n) + "]");
    }
    for (std::size_t i = 0; i < failures_.size(); ++i) {
      if (!(failures_[i] > 0.0) || !std::isfinite(failures_[i])) {
        throw data_error("CensoredSample: failure times must be positive and finite");
      }
      if (i > 0 && failures_[i] < failures_[i - 1]) {
        throw data_error("CensoredSample: failure times must be nondecreasing");
      }
    }
    if (!(censor_time_ > 0.0) || !std::isfinite(censor_time_)) {
      throw data_error("CensoredSample: U must be positive and finite");
    }
    if (kind_ == CensoringCase::I) {
      if (r != scheme_.n) throw data_error("CensoredSample: Case I requires r = n");
    } else if (failures_.back() > censor_time_) {
      throw data_error("CensoredSample: Case II failures must not exceed U");
    }
  }

  CensoringScheme scheme_;
  CensoringCase kind_;
  std::vector<double> failures_;
  double censor_time_;
};

// Applies the termination rule T* = min{X_{n:n}, X_{m:n} + S} to a complete
// sample of n lifetimes. Input order is irrelevant. A failure exactly at U is
// observed; X_{n:n} == U is Case I.
inline CensoredSample apply_scheme(std::span<const double> complete, const CensoringScheme& scheme) {
  if (static_cast<int>(complete.size()) != scheme.n) {
    throw data_error("apply_scheme: expected " + std::to_string(scheme.n) + " lifetimes, got " +
                     std::to_string(complete.size()));
  }
  std::vector<double> x(complete.begin(), complete.end());
  for (double v : x) {
    if (!(v > 0.0) || !std::isfinite(v)) throw data_error("apply_scheme: lifetimes must be positive");
  }
  std::sort(x.begin(), x.end());
  const double U = x[scheme.m - 1] + scheme.S;
  if (x.back() <= U) {
    return CensoredSample::make(scheme, CensoringCase::I, std::move(x), U);
  }
  const auto cut = std::upper_bound(x.begin(), x.end(), U);
  x.erase(cut, x.end());
  return CensoredSample::make(scheme, CensoringCase::II, std::move(x), U);
}

// Sufficient quantities of the combined score equations at a given gamma:
//   w = r (n in Case I), P = sum x^g log x (+ (n-r) U^g log U),
//   Q = sum x^g (+ (n-r) U^g), sum_log = sum over observed log x.
struct Sufficients {
  int w;
  double P;
  double Q;
  double sum_log;
};

inline Sufficients log_likelihood_sufficients(const CensoredSample& s, double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("log_likelihood_sufficients: gamma must be positive");
  Sufficients out{s.r(), 0.0, 0.0, 0.0};
  for (double x : s.failures()) {
    const double lx = std::log(x);
    const double xg = std::pow(x, gamma);
    out.P += xg * lx;
    out.Q += xg;
    out.sum_log += lx;
  }
  if (const int k = s.survivors(); k > 0) {
    const double lu = std::log(s.U());
    const double ug = std::pow(s.U(), gamma);
    out.P += k * ug * lu;
    out.Q += k * ug;
  }
  return out;
}

// Sum over observed failures and censored survivors of x^g (log x)^2.
inline double weighted_log_square(const CensoredSample& s, double gamma) {
  double acc = 0.0;
  for (double x : s.failures()) {
    const double lx = std::log(x);
    acc += std::pow(x, gamma) * lx * lx;
  }
  if (const int k = s.survivors(); k > 0) {
    const double lu = std::log(s.U());
    acc += k * std::pow(s.U(), gamma) * lu * lu;
  }
  return acc;
}

// w log g + w log d + (g-1) sum log x - d Q(g).
inline double log_likelihood(const CensoredSample& s, const WeibullParams& p) {
  const auto suf = log_likelihood_sufficients(s, p.gamma);
  return suf.w * (std::log(p.gamma) + std::log(p.delta)) + (p.gamma - 1.0) * suf.sum_log -
         p.delta * suf.Q;
}

} // namespace t1t2
