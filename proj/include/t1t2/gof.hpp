#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"
#include "t1t2/mle.hpp"

namespace t1t2 {

// P(K > t) for the limiting Kolmogorov distribution.
inline double kolmogorov_sf(double t) {
  if (!(t > 0.0)) return 1.0;
  if (t < 0.5) {
    // Dual (Jacobi theta) form converges fast for small t.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int j = 1; j < 100; ++j) {
      const double k = 2.0 * j - 1.0;
      const double term = std::exp(-k * k * pi2 / (8.0 * t * t));
      cdf += term;
      if (term < 1e-16) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / t;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double acc = 0.0;
  for (int j = 1; j < 1000; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * t * t);
    acc += (j % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(acc, 0.0, 1.0);
}

struct KsResult {
  double D;
  double p_value;
};

// One-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
// evaluated at sqrt(n) D. Parameters are taken as known.
inline KsResult ks_test(std::span<const double> data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw std::invalid_argument("ks_test: empty data");
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, std::abs(F - (i + 1) / n), std::abs(F - i / n)});
  }
  return {D, kolmogorov_sf(std::sqrt(n) * D)};
}

struct InformationCriteria {
  double aic;
  std::optional<double> aicc;  // undefined when n <= k + 1
  double bic;
  double hqc;
};

// nll2 is -2 times the maximized log-likelihood.
inline InformationCriteria information_criteria(double nll2, int k, int n) {
  if (k < 0 || n < 1) throw std::invalid_argument("information_criteria: need k >= 0, n >= 1");
  InformationCriteria ic{};
  ic.aic = 2.0 * k + nll2;
  if (n > k + 1) ic.aicc = ic.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0);
  ic.bic = k * std::log(static_cast<double>(n)) + nll2;
  ic.hqc = n > 1 ? 2.0 * k * std::log(std::log(static_cast<double>(n))) + nll2 : nll2;
  return ic;
}

enum class Model { Weibull, Lindley, InverseWeibull };

inline const char* to_string(Model m) {
  switch (m) {
    case Model::Weibull: return "Weibull";
    case Model::Lindley: return "Lindley";
    case Model::InverseWeibull: return "IW";
  }
  return "?";
}

struct FitReport {
  Model model;
  std::vector<double> estimates;
  double ks_stat;
  double p_value;
  double nll2;
  double aic;
  std::optional<double> aicc;
  double bic;
  double hqc;
};

namespace detail {

inline void require_complete_data(std::span<const double> data, std::size_t min_size) {
  if (data.size() < min_size) throw data_error("fit: not enough observations");
  for (double v : data) {
    if (!(v > 0.0) || !std::isfinite(v)) throw data_error("fit: observations must be positive");
  }
}

inline FitReport make_report(Model model, std::vector<double> est, double loglik, int k,
                             std::span<const double> data,
                             const std::function<double(double)>& cdf) {
  const auto ks = ks_test(data, cdf);
  const double nll2 = -2.0 * loglik;
  const auto ic = information_criteria(nll2, k, static_cast<int>(data.size()));
  return {model, std::move(est), ks.D, ks.p_value, nll2, ic.aic, ic.aicc, ic.bic, ic.hqc};
}

} // namespace detail

// Weibull MLE on a complete (uncensored) sample.
inline MleResult fit_weibull_complete(std::span<const double> data, const MleConfig& cfg = {}) {
  detail::require_complete_data(data, 2);
  const int n = static_cast<int>(data.size());
  return fit_mle(apply_scheme(data, CensoringScheme(n, n, 0.0)), cfg);
}

// Closed-form Lindley MLE: root of theta^2 xbar + theta (xbar - 1) - 2 = 0.
inline LindleyParams fit_lindley(std::span<const double> data) {
  detail::require_complete_data(data, 1);
  double sum = 0.0;
  for (double v : data) sum += v;
  const double xb = sum / static_cast<double>(data.size());
  return LindleyParams((-(xb - 1.0) + std::sqrt((xb - 1.0) * (xb - 1.0) + 8.0 * xb)) / (2.0 * xb));
}

// Inverse Weibull MLE: 1/X is Weibull with the same (gamma, delta), and the
// Jacobian of the transform does not involve the parameters.
inline InverseWeibullParams fit_invweibull(std::span<const double> data, const MleConfig& cfg = {}) {
  detail::require_complete_data(data, 2);
  std::vector<double> inv(data.size());
  std::transform(data.begin(), data.end(), inv.begin(), [](double v) { return 1.0 / v; });
  const auto res = fit_weibull_complete(inv, cfg);
  if (!res.converged) throw convergence_error("fit_invweibull: did not converge", res.params.gamma);
  return InverseWeibullParams(res.params.gamma, res.params.delta);
}

inline FitReport weibull_fit_report(std::span<const double> data, const WeibullParams& p) {
  double ll = 0.0;
  for (double v : data) ll += weibull_logpdf(v, p);
  return detail::make_report(Model::Weibull, {p.gamma, p.delta}, ll, 2, data,
                             [&](double x) { return weibull_cdf(x, p); });
}

inline FitReport lindley_fit_report(std::span<const double> data, const LindleyParams& p) {
  double ll = 0.0;
  for (double v : data) ll += lindley_logpdf(v, p);
  return detail::make_report(Model::Lindley, {p.theta}, ll, 1, data,
                             [&](double x) { return lindley_cdf(x, p); });
}

inline FitReport invweibull_fit_report(std::span<const double> data, const InverseWeibullParams& p) {
  double ll = 0.0;
  for (double v : data) ll += invweibull_logpdf(v, p);
  return detail::make_report(Model::InverseWeibull, {p.gamma, p.delta}, ll, 2, data,
                             [&](double x) { return invweibull_cdf(x, p); });
}

// Fits all three models to complete data, Weibull first.
inline std::vector<FitReport> compare_models(std::span<const double> data) {
  const auto w = fit_weibull_complete(data);
  if (!w.converged) throw convergence_error("compare_models: Weibull fit did not converge", w.params.gamma);
  return {weibull_fit_report(data, w.params), lindley_fit_report(data, fit_lindley(data)),
          invweibull_fit_report(data, fit_invweibull(data))};
}

inline const FitReport& best_by_aic(const std::vector<FitReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("best_by_aic: no reports");
  return *std::min_element(reports.begin(), reports.end(),
                           [](const FitReport& a, const FitReport& b) { return a.aic < b.aic; });
}

// ---------------------------------------------------------------------------
// Probability-plot point sets for a fitted Weibull.

struct PointSet {
  std::string x_name;
  std::string y_name;
  std::vector<std::pair<double, double>> points;
};

struct PlotData {
  PointSet density;    // fitted density on a grid
  PointSet histogram;  // bin centre, density-scaled bar height
  PointSet ecdf;       // sorted data, i/n
  PointSet cdf;        // grid, fitted CDF
  PointSet pp;         // fitted F(x_(i)), plotting position
  PointSet qq;         // fitted quantile at plotting position, x_(i)
};

// Plotting positions default to i/(n+1).
inline PlotData plot_data(std::span<const double> data, const WeibullParams& p, int grid_points = 200,
                          int bins = 0, double position_offset = 0.0, double position_extra = 1.0) {
  detail::require_complete_data(data, 1);
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const double nn = static_cast<double>(n);
  if (bins <= 0) bins = std::max(1, static_cast<int>(std::ceil(std::log2(nn) + 1.0)));  // Sturges

  PlotData out{{"x", "fitted_density", {}}, {"bin_center", "height", {}}, {"x", "empirical_cdf", {}},
               {"x", "fitted_cdf", {}},     {"fitted_cdf", "plotting_position", {}},
               {"fitted_quantile", "observed", {}}};

  const double hi = x.back() * 1.1;
  for (int k = 1; k <= grid_points; ++k) {
    const double g = hi * k / grid_points;
    out.density.points.emplace_back(g, weibull_pdf(g, p));
    out.cdf.points.emplace_back(g, weibull_cdf(g, p));
  }
  const double lo_edge = 0.0;
  const double width = x.back() / bins;
  std::vector<int> counts(bins, 0);
  for (double v : x) {
    int b = static_cast<int>((v - lo_edge) / width);
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  for (int b = 0; b < bins; ++b) {
    out.histogram.points.emplace_back(lo_edge + (b + 0.5) * width, counts[b] / (nn * width));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = (i + 1 - position_offset) / (nn + position_extra);
    out.ecdf.points.emplace_back(x[i], (i + 1) / nn);
    out.pp.points.emplace_back(weibull_cdf(x[i], p), pos);
    out.qq.points.emplace_back(weibull_quantile(pos, p), x[i]);
  }
  return out;
}

// One comma-delimited file per panel, header row naming the two columns.
inline void write_point_set(const std::filesystem::path& path, const PointSet& ps) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.precision(17);
  f << ps.x_name << ',' << ps.y_name << '\n';
  for (const auto& [a, b] : ps.points) f << a << ',' << b << '\n';
}

inline std::vector<std::filesystem::path> export_plot_data(const std::filesystem::path& dir,
                                                           const PlotData& pd) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<const char*, const PointSet*>> files{
      {"density.csv", &pd.density}, {"histogram.csv", &pd.histogram}, {"ecdf.csv", &pd.ecdf},
      {"cdf.csv", &pd.cdf},         {"pp.csv", &pd.pp},               {"qq.csv", &pd.qq}};
  std::vector<std::filesystem::path> written;
  for (const auto& [name, ps] : files) {
    written.push_back(dir / name);
    write_point_set(written.back(), *ps);
  }
  return written;
}

} // namespace t1t2
