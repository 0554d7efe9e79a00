#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "t1t2/bayes.hpp"
#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"
#include "t1t2/mle.hpp"
#include "t1t2/parallel.hpp"
#include "t1t2/rng.hpp"

namespace t1t2 {

struct StudyDesign {
  WeibullParams truth{1.0, 1.0};
  std::vector<CensoringScheme> schemes;
  std::size_t replications = 1000;
  std::uint64_t base_seed = 1;
  MleConfig mle;
  PriorSpec prior{1.0, 1.0, 1.0, 1.0};
  McmcConfig mcmc = study_mcmc_defaults();
  std::vector<double> loss_params{-1.0, 1.0};
  double alpha = 0.05;
  unsigned workers = 1;

  // Shortened chains so that a thousand replications stay tractable.
  static McmcConfig study_mcmc_defaults() {
    McmcConfig c;
    c.chain_length = 3000;
    c.burn_in = 500;
    return c;
  }

  void validate() const {
    if (replications < 1) throw std::invalid_argument("StudyDesign: replications must be >= 1");
    if (schemes.empty()) throw std::invalid_argument("StudyDesign: no schemes");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("StudyDesign: alpha in (0,1)");
    for (double d : loss_params) {
      if (d == 0.0) throw std::invalid_argument("StudyDesign: LINEX d = 0 is not allowed");
    }
    prior.validate();
    mcmc.validate();
  }
};

// The scheme grid of the published study: (n, m) pairs for S in {0.1, 0.2},
// including the (100, 80) rows.
inline std::vector<CensoringScheme> default_scheme_grid() {
  const std::vector<std::pair<int, int>> nm{{100, 100}, {100, 90}, {100, 85}, {100, 80},
                                            {60, 60},   {60, 55},  {60, 50},  {60, 45},
                                            {30, 30},   {30, 25},  {30, 20},  {30, 15},
                                            {15, 15},   {15, 12},  {15, 10},  {15, 7}};
  std::vector<CensoringScheme> out;
  for (double S : {0.1, 0.2}) {
    for (const auto& [n, m] : nm) out.emplace_back(n, m, S);
  }
  return out;
}

// Monte Carlo summary of point estimates against the truth.
//   mse = variance + bias^2 (population variance).
struct EstimateSummary {
  double bias = 0.0;
  double mse = 0.0;
  double variance = 0.0;
  double bias_se = 0.0;  // MC standard error of the bias
  double mse_se = 0.0;   // MC standard error of the MSE
};

inline EstimateSummary summarize_estimates(const std::vector<double>& est, double truth) {
  EstimateSummary s;
  if (est.empty()) return s;
  const double k = static_cast<double>(est.size());
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= k;
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= k;
  s.bias = mean - truth;
  s.variance = var;
  s.mse = var + s.bias * s.bias;
  s.bias_se = std::sqrt(var / k);
  double v2 = 0.0;
  for (double e : est) {
    const double sq = (e - truth) * (e - truth);
    v2 += (sq - s.mse) * (sq - s.mse);
  }
  s.mse_se = std::sqrt(v2 / k / k);
  return s;
}

// Average interval length (CL) and empirical coverage (CP).
struct IntervalSummary {
  double cl = 0.0;
  double cp = 0.0;
  std::size_t count = 0;
};

inline IntervalSummary summarize_intervals(const std::vector<Interval>& iv, double truth) {
  IntervalSummary s;
  s.count = iv.size();
  if (iv.empty()) return s;
  double len = 0.0;
  std::size_t hit = 0;
  for (const auto& i : iv) {
    len += i.length();
    if (i.contains(truth)) ++hit;
  }
  s.cl = len / static_cast<double>(iv.size());
  s.cp = static_cast<double>(hit) / static_cast<double>(iv.size());
  return s;
}

struct MleRow {
  CensoringScheme scheme;
  std::size_t used = 0;
  std::size_t dropped = 0;
  double mean_failures = 0.0;
  EstimateSummary gamma;
  EstimateSummary delta;
  IntervalSummary aci_gamma;
  IntervalSummary aci_delta;
};

struct LinexRow {
  double d;
  BiasRisk gamma;
  BiasRisk delta;
};

struct BayesRow {
  CensoringScheme scheme;
  std::size_t used = 0;
  std::size_t dropped = 0;
  std::size_t acceptance_warnings = 0;
  double mean_acceptance = 0.0;
  BiasRisk se_gamma{};
  BiasRisk se_delta{};
  std::vector<LinexRow> linex;
  IntervalSummary hpd_gamma;
  IntervalSummary hpd_delta;
};

struct StudyResult {
  WeibullParams truth{1.0, 1.0};
  std::size_t replications = 0;
  std::uint64_t base_seed = 0;
  std::vector<MleRow> mle_rows;
  std::vector<BayesRow> bayes_rows;
};

namespace detail {

struct ReplicationOutcome {
  bool mle_ok = false;
  int failures = 0;
  double mle_gamma = 0.0, mle_delta = 0.0;
  Interval aci_gamma{0, 0}, aci_delta{0, 0};

  bool bayes_ok = false;
  bool warning = false;
  double acceptance = 0.0;
  double se_gamma = 0.0, se_delta = 0.0;
  std::vector<WeibullParams> linex;
  Interval hpd_gamma{0, 0}, hpd_delta{0, 0};
};

inline ReplicationOutcome run_replication(const StudyDesign& design, std::size_t scheme_idx,
                                          std::size_t rep, bool with_bayes) {
  const auto& scheme = design.schemes[scheme_idx];
  ReplicationOutcome out;
  rng data_gen(derive_seed(design.base_seed, scheme_idx, rep, 0));
  const auto lifetimes = sample_weibull(scheme.n, design.truth, data_gen);
  const auto sample = apply_scheme(lifetimes, scheme);
  out.failures = sample.r();

  std::optional<MleResult> mle;
  try {
    mle = fit_mle(sample, design.mle);
  } catch (const data_error&) {
  }
  if (mle && mle->converged && mle->aci_gamma && mle->aci_delta) {
    out.mle_ok = true;
    out.mle_gamma = mle->params.gamma;
    out.mle_delta = mle->params.delta;
    out.aci_gamma = *mle->aci_gamma;
    out.aci_delta = *mle->aci_delta;
  }
  if (!with_bayes) return out;

  McmcConfig cfg = design.mcmc;
  cfg.seed = derive_seed(design.base_seed, scheme_idx, rep, 1);
  cfg.record_proposals = false;
  if (!cfg.init && out.mle_ok) cfg.init = mle->params;
  if (!cfg.proposal_sd && out.mle_ok && mle->se_gamma > 0.0) cfg.proposal_sd = 0.5 * mle->se_gamma;
  try {
    const auto post = run_mh_gibbs(sample, design.prior, cfg);
    const auto est = bayes_estimates(post, design.loss_params, design.alpha);
    out.bayes_ok = true;
    out.warning = post.acceptance_warning;
    out.acceptance = post.acceptance_rate;
    out.se_gamma = est.se_gamma;
    out.se_delta = est.se_delta;
    for (double d : design.loss_params) out.linex.push_back(est.linex.at(d));
    out.hpd_gamma = est.hpd_gamma;
    out.hpd_delta = est.hpd_delta;
  } catch (const std::domain_error&) {
  } catch (const data_error&) {
  }
  return out;
}

inline StudyResult run_study(const StudyDesign& design, bool with_mle, bool with_bayes) {
  design.validate();
  StudyResult result;
  result.truth = design.truth;
  result.replications = design.replications;
  result.base_seed = design.base_seed;
  const double tg = design.truth.gamma, td = design.truth.delta;

  for (std::size_t si = 0; si < design.schemes.size(); ++si) {
    std::vector<ReplicationOutcome> reps(design.replications);
    parallel_for(design.replications, design.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) reps[i] = run_replication(design, si, i, with_bayes);
    });

    // Reduction in replication order.
    if (with_mle) {
      MleRow row{design.schemes[si], 0, 0, 0.0, {}, {}, {}, {}};
      std::vector<double> g, d;
      std::vector<Interval> ig, id;
      double failures = 0.0;
      for (const auto& r : reps) {
        failures += r.failures;
        if (!r.mle_ok) {
          ++row.dropped;
          continue;
        }
        g.push_back(r.mle_gamma);
        d.push_back(r.mle_delta);
        ig.push_back(r.aci_gamma);
        id.push_back(r.aci_delta);
      }
      row.used = g.size();
      row.mean_failures = failures / static_cast<double>(reps.size());
      row.gamma = summarize_estimates(g, tg);
      row.delta = summarize_estimates(d, td);
      row.aci_gamma = summarize_intervals(ig, tg);
      row.aci_delta = summarize_intervals(id, td);
      result.mle_rows.push_back(row);
    }
    if (with_bayes) {
      BayesRow row{design.schemes[si], 0, 0, 0, 0.0, {}, {}, {}, {}, {}};
      std::vector<double> g, d;
      std::vector<std::vector<double>> lg(design.loss_params.size()), ld(design.loss_params.size());
      std::vector<Interval> hg, hd;
      double acc = 0.0;
      for (const auto& r : reps) {
        if (!r.bayes_ok) {
          ++row.dropped;
          continue;
        }
        if (r.warning) ++row.acceptance_warnings;
        acc += r.acceptance;
        g.push_back(r.se_gamma);
        d.push_back(r.se_delta);
        for (std::size_t k = 0; k < design.loss_params.size(); ++k) {
          lg[k].push_back(r.linex[k].gamma);
          ld[k].push_back(r.linex[k].delta);
        }
        hg.push_back(r.hpd_gamma);
        hd.push_back(r.hpd_delta);
      }
      row.used = g.size();
      if (row.used > 0) {
        row.mean_acceptance = acc / static_cast<double>(row.used);
        row.se_gamma = bias_and_risk(g, tg, SquaredError{});
        row.se_delta = bias_and_risk(d, td, SquaredError{});
        for (std::size_t k = 0; k < design.loss_params.size(); ++k) {
          const double dl = design.loss_params[k];
          row.linex.push_back({dl, bias_and_risk(lg[k], tg, Linex{dl}),
                               bias_and_risk(ld[k], td, Linex{dl})});
        }
      }
      row.hpd_gamma = summarize_intervals(hg, tg);
      row.hpd_delta = summarize_intervals(hd, td);
      result.bayes_rows.push_back(row);
    }
  }
  return result;
}

} // namespace detail

// Bias, MSE, ACI length and coverage of the MLE per scheme. Replications
// whose fit does not converge are dropped and counted.
inline StudyResult run_mle_study(const StudyDesign& design) {
  return detail::run_study(design, true, false);
}

// SE and LINEX bias/risk and HPD length/coverage per scheme.
inline StudyResult run_bayes_study(const StudyDesign& design) {
  return detail::run_study(design, false, true);
}

// Both interval methods on the same simulated datasets.
inline StudyResult coverage_table(const StudyDesign& design) {
  return detail::run_study(design, true, true);
}

// ---------------------------------------------------------------------------
// Comma-delimited tables, one row per scheme.

namespace detail {

inline std::string fmt_num(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::string scheme_label(const CensoringScheme& s) {
  return std::to_string(s.n) + "/" + std::to_string(s.m) + "/" + fmt_num(s.S);
}

inline std::string d_label(double d) { return fmt_num(d); }

} // namespace detail

inline std::string mle_table_csv(const StudyResult& r) {
  std::ostringstream os;
  os << "scheme,n,m,S,used,dropped,mean_failures,bias_gamma,bias_delta,mse_gamma,mse_delta,"
        "bias_se_gamma,bias_se_delta,mse_se_gamma,mse_se_delta\n";
  for (const auto& row : r.mle_rows) {
    using detail::fmt_num;
    os << detail::scheme_label(row.scheme) << ',' << row.scheme.n << ',' << row.scheme.m << ','
       << fmt_num(row.scheme.S) << ',' << row.used << ',' << row.dropped << ','
       << fmt_num(row.mean_failures) << ',' << fmt_num(row.gamma.bias) << ','
       << fmt_num(row.delta.bias) << ',' << fmt_num(row.gamma.mse) << ',' << fmt_num(row.delta.mse)
       << ',' << fmt_num(row.gamma.bias_se) << ',' << fmt_num(row.delta.bias_se) << ','
       << fmt_num(row.gamma.mse_se) << ',' << fmt_num(row.delta.mse_se) << '\n';
  }
  return os.str();
}

inline std::string bayes_table_csv(const StudyResult& r) {
  std::ostringstream os;
  os << "scheme,n,m,S,used,dropped,acceptance_warnings,mean_acceptance,"
        "se_bias_gamma,se_bias_delta,se_risk_gamma,se_risk_delta";
  if (!r.bayes_rows.empty()) {
    for (const auto& l : r.bayes_rows.front().linex) {
      const auto d = detail::d_label(l.d);
      os << ",linex_bias_gamma_d=" << d << ",linex_bias_delta_d=" << d << ",linex_risk_gamma_d=" << d
         << ",linex_risk_delta_d=" << d;
    }
  }
  os << '\n';
  for (const auto& row : r.bayes_rows) {
    using detail::fmt_num;
    os << detail::scheme_label(row.scheme) << ',' << row.scheme.n << ',' << row.scheme.m << ','
       << fmt_num(row.scheme.S) << ',' << row.used << ',' << row.dropped << ','
       << row.acceptance_warnings << ',' << fmt_num(row.mean_acceptance) << ','
       << fmt_num(row.se_gamma.bias) << ',' << fmt_num(row.se_delta.bias) << ','
       << fmt_num(row.se_gamma.risk) << ',' << fmt_num(row.se_delta.risk);
    for (const auto& l : row.linex) {
      os << ',' << fmt_num(l.gamma.bias) << ',' << fmt_num(l.delta.bias) << ','
         << fmt_num(l.gamma.risk) << ',' << fmt_num(l.delta.risk);
    }
    os << '\n';
  }
  return os.str();
}

// CL/CP for ACI and HPD; rows are matched by scheme and either side may be
// absent (empty cells).
inline std::string coverage_table_csv(const StudyResult& r) {
  std::ostringstream os;
  os << "scheme,n,m,S,hpd_cl_gamma,hpd_cl_delta,hpd_cp_gamma,hpd_cp_delta,"
        "aci_cl_gamma,aci_cl_delta,aci_cp_gamma,aci_cp_delta\n";
  const std::size_t rows = std::max(r.mle_rows.size(), r.bayes_rows.size());
  for (std::size_t i = 0; i < rows; ++i) {
    using detail::fmt_num;
    const auto& scheme = i < r.mle_rows.size() ? r.mle_rows[i].scheme : r.bayes_rows[i].scheme;
    os << detail::scheme_label(scheme) << ',' << scheme.n << ',' << scheme.m << ','
       << fmt_num(scheme.S);
    if (i < r.bayes_rows.size()) {
      const auto& b = r.bayes_rows[i];
      os << ',' << fmt_num(b.hpd_gamma.cl) << ',' << fmt_num(b.hpd_delta.cl) << ','
         << fmt_num(b.hpd_gamma.cp) << ',' << fmt_num(b.hpd_delta.cp);
    } else {
      os << ",,,,";
    }
    if (i < r.mle_rows.size()) {
      const auto& m = r.mle_rows[i];
      os << ',' << fmt_num(m.aci_gamma.cl) << ',' << fmt_num(m.aci_delta.cl) << ','
         << fmt_num(m.aci_gamma.cp) << ',' << fmt_num(m.aci_delta.cp);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

} // namespace t1t2
