#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "t1t2/error.hpp"

namespace t1t2::quad {

struct integration_result {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Integral of f over [a, b], a < b finite. Endpoint singularities of the
// x^(gamma-1) / log x kind are handled by the double-exponential nodes.
template <typename F>
integration_result integrate(F&& f, double a, double b, double tol = 1e-10) {
  if (!(a < b)) {
    if (a == b) return {};
    throw std::invalid_argument("integrate: requires a <= b");
  }
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double err = 0.0;
  double l1 = 0.0;
  const double v = ts.integrate(f, a, b, tol, &err, &l1);
  return {v, err * std::max(1.0, l1)};
}

// Integral of f over [0, inf). The domain is cut at the given breakpoints
// (kinks, scale points); finite pieces use tanh-sinh, the tail exp-sinh.
template <typename F>
integration_result integrate_half_line(F&& f, std::vector<double> breaks = {},
                                       double tol = 1e-10) {
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [](double b) { return !(b > 0.0) || !std::isfinite(b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.empty()) breaks.push_back(1.0);

  integration_result total;
  double lo = 0.0;
  for (double b : breaks) {
    const auto piece = integrate(f, lo, b, tol);
    total.value += piece.value;
    total.error_estimate += piece.error_estimate;
    lo = b;
  }
  boost::math::quadrature::exp_sinh<double> es(12);
  double err = 0.0;
  double l1 = 0.0;
  const double tail = es.integrate(
      [&](double x) { return f(x); }, lo, std::numeric_limits<double>::infinity(),
      tol, &err, &l1);
  total.value += tail;
  total.error_estimate += err * std::max(1.0, l1);
  if (!std::isfinite(total.value)) {
    throw convergence_error("integrate_half_line: non-finite result", total.value);
  }
  return total;
}

} // namespace t1t2::quad
