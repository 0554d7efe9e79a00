#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"
#include "t1t2/mle.hpp"
#include "t1t2/rng.hpp"

namespace t1t2 {

// Independent gamma priors, shape/rate: gamma ~ Gamma(alpha1, beta1),
// delta ~ Gamma(alpha2, beta2). Zeros give the improper limit.
struct PriorSpec {
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double alpha2 = 0.0;
  double beta2 = 0.0;

  void validate() const {
    for (double v : {alpha1, beta1, alpha2, beta2}) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("PriorSpec: hyperparameters must be finite and >= 0");
      }
    }
  }
};

struct McmcConfig {
  int chain_length = 11000;  // N
  int burn_in = 1000;        // M
  // Random-walk standard deviation for gamma; nullopt picks
  // 0.5 * MLE standard error of gamma, or 1.0 when that is unavailable.
  std::optional<double> proposal_sd;
  std::uint64_t seed = 20240601;
  std::optional<WeibullParams> init;
  // Keep every gamma proposal with its log acceptance ratio.
  bool record_proposals = false;

  void validate() const {
    if (chain_length < 1 || burn_in < 0 || burn_in >= chain_length) {
      throw std::invalid_argument("McmcConfig: need 0 <= burn_in < chain_length");
    }
    if (proposal_sd && !(*proposal_sd > 0.0)) {
      throw std::invalid_argument("McmcConfig: proposal_sd must be positive");
    }
  }
};

struct ProposalRecord {
  double current;
  double proposed;
  double delta;
  double log_ratio;  // -inf for proposals outside the support
  bool accepted;
};

struct PosteriorSample {
  std::vector<double> gamma_chain;
  std::vector<double> delta_chain;
  double acceptance_rate = 0.0;
  double proposal_sd = 0.0;
  WeibullParams init{1.0, 1.0};
  bool acceptance_warning = false;
  std::vector<ProposalRecord> proposals;
};

// log pi(gamma | delta, data) up to a constant:
//   (alpha1 + w - 1) log g + (g - 1) sum log x - d Q(g) - beta1 g.
inline double log_conditional_gamma(double gamma, double delta, const CensoredSample& s,
                                    const PriorSpec& prior) {
  if (!(gamma > 0.0) || !(delta > 0.0)) {
    throw std::domain_error("log_conditional_gamma: gamma and delta must be positive");
  }
  const auto suf = log_likelihood_sufficients(s, gamma);
  return (prior.alpha1 + suf.w - 1.0) * std::log(gamma) + (gamma - 1.0) * suf.sum_log -
         delta * suf.Q - prior.beta1 * gamma;
}

// Shape and rate of the exact conditional delta | gamma:
//   Gamma(alpha2 + w, beta2 + Q(gamma)).
inline std::pair<double, double> conditional_delta_params(double gamma, const CensoredSample& s,
                                                          const PriorSpec& prior) {
  const auto suf = log_likelihood_sufficients(s, gamma);
  return {prior.alpha2 + suf.w, prior.beta2 + suf.Q};
}

inline double sample_conditional_delta(double gamma, const CensoredSample& s,
                                       const PriorSpec& prior, rng& gen) {
  const auto [shape, rate] = conditional_delta_params(gamma, s, prior);
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(rate)) {
    throw std::domain_error("sample_conditional_delta: invalid gamma shape/rate");
  }
  return gen.gamma(shape, rate);
}

// Log marginal posterior of gamma with delta integrated out analytically:
//   (alpha1 + w - 1) log g + (g - 1) sum log x - beta1 g
//     - (alpha2 + w) log(beta2 + Q(g)).
inline double log_marginal_gamma(double gamma, const CensoredSample& s, const PriorSpec& prior) {
  const auto suf = log_likelihood_sufficients(s, gamma);
  return (prior.alpha1 + suf.w - 1.0) * std::log(gamma) + (gamma - 1.0) * suf.sum_log -
         prior.beta1 * gamma - (prior.alpha2 + suf.w) * std::log(prior.beta2 + suf.Q);
}

// Integrability screen run before sampling: on a log grid over [1e-6, 100]
// the marginal log density of gamma must end well below its peak.
inline void check_gamma_conditional_proper(const CensoredSample& s, const PriorSpec& prior) {
  if (prior.alpha1 + s.r() <= 0.0) {
    throw std::domain_error("gamma posterior is improper at zero: alpha1 + w must be positive");
  }
  double peak = -std::numeric_limits<double>::infinity();
  double last = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double g = std::pow(10.0, -6.0 + 8.0 * k / 400.0);
    const double v = log_marginal_gamma(g, s, prior);
    if (std::isfinite(v)) peak = std::max(peak, v);
    last = v;
  }
  if (!std::isfinite(peak) || !(last < peak - 20.0)) {
    throw std::domain_error("gamma posterior does not decay on [1e-6, 100]; prior may be improper");
  }
}

namespace detail {

inline double chain_mean(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += v;
  return s / static_cast<double>(c.size());
}

} // namespace detail

// Metropolis-Hastings within Gibbs. Each sweep: a normal random-walk update of
// gamma against its conditional (non-positive proposals are rejections), then
// an exact gamma draw of delta. The first burn_in sweeps are discarded.
inline PosteriorSample run_mh_gibbs(const CensoredSample& s, const PriorSpec& prior,
                                    const McmcConfig& cfg) {
  prior.validate();
  cfg.validate();
  check_gamma_conditional_proper(s, prior);

  std::optional<MleResult> mle;
  if (!cfg.init || !cfg.proposal_sd) {
    try {
      mle = fit_mle(s);
      if (!mle->converged) mle.reset();
    } catch (const data_error&) {
      mle.reset();
    }
  }

  PosteriorSample out;
  out.init = cfg.init ? *cfg.init : (mle ? mle->params : WeibullParams(1.0, 1.0));
  if (cfg.proposal_sd) {
    out.proposal_sd = *cfg.proposal_sd;
  } else if (mle && mle->se_gamma > 0.0 && std::isfinite(mle->se_gamma)) {
    out.proposal_sd = 0.5 * mle->se_gamma;
  } else {
    out.proposal_sd = 1.0;
  }

  rng gen(cfg.seed);
  double g = out.init.gamma;
  double d = out.init.delta;
  double lc = log_conditional_gamma(g, d, s, prior);
  const std::size_t kept = static_cast<std::size_t>(cfg.chain_length - cfg.burn_in);
  out.gamma_chain.reserve(kept);
  out.delta_chain.reserve(kept);
  if (cfg.record_proposals) out.proposals.reserve(cfg.chain_length);
  long accepted = 0;

  for (int it = 0; it < cfg.chain_length; ++it) {
    const double psi = g + out.proposal_sd * gen.normal();
    const double u = gen.uniform();
    double log_ratio = -std::numeric_limits<double>::infinity();
    double lc_psi = 0.0;
    if (psi > 0.0) {
      lc_psi = log_conditional_gamma(psi, d, s, prior);
      log_ratio = lc_psi - lc;
    }
    const bool accept = psi > 0.0 && std::log(u) <= log_ratio;
    if (cfg.record_proposals) out.proposals.push_back({g, psi, d, log_ratio, accept});
    if (accept) {
      g = psi;
      ++accepted;
    }
    d = sample_conditional_delta(g, s, prior, gen);
    lc = log_conditional_gamma(g, d, s, prior);
    if (it >= cfg.burn_in) {
      out.gamma_chain.push_back(g);
      out.delta_chain.push_back(d);
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / cfg.chain_length;
  out.acceptance_warning = out.acceptance_rate < 0.05 || out.acceptance_rate > 0.95;
  return out;
}

// Bayes estimate under LINEX loss: -(1/d) log E[exp(-d theta)], with the
// exponent shifted by its maximum before averaging.
inline double linex_estimate(const std::vector<double>& chain, double d) {
  if (chain.empty()) throw std::invalid_argument("linex_estimate: empty chain");
  if (d == 0.0) throw std::invalid_argument("linex_estimate: d = 0 is the squared-error case");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : chain) top = std::max(top, -d * v);
  double acc = 0.0;
  for (double v : chain) acc += std::exp(-d * v - top);
  const double log_mean = top + std::log(acc / static_cast<double>(chain.size()));
  return -log_mean / d;
}

// Shortest window over the sorted draws holding ceil((1 - alpha) K) of
// them; ties go to the leftmost window.
inline Interval hpd_interval(std::vector<double> chain, double alpha) {
  if (chain.empty()) throw std::invalid_argument("hpd_interval: empty chain");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("hpd_interval: alpha in (0,1)");
  std::sort(chain.begin(), chain.end());
  const std::size_t K = chain.size();
  const auto width = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(K) - 1e-9));
  const std::size_t w = std::clamp<std::size_t>(width, 1, K);
  std::size_t best = 0;
  double best_len = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + w <= K; ++i) {
    const double len = chain[i + w - 1] - chain[i];
    if (len < best_len) {
      best_len = len;
      best = i;
    }
  }
  return {chain[best], chain[best + w - 1]};
}

// Equal-tailed interval from empirical quantiles (type 1, inverse ECDF).
inline Interval equal_tailed_interval(std::vector<double> chain, double alpha) {
  if (chain.empty()) throw std::invalid_argument("equal_tailed_interval: empty chain");
  std::sort(chain.begin(), chain.end());
  const std::size_t K = chain.size();
  const auto idx = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(K) - 1e-9));
    return std::clamp<std::size_t>(k, 1, K) - 1;
  };
  return {chain[idx(alpha / 2.0)], chain[idx(1.0 - alpha / 2.0)]};
}

struct BayesEstimates {
  double se_gamma;
  double se_delta;
  // d -> (gamma, delta) LINEX estimates.
  std::map<double, WeibullParams> linex;
  Interval hpd_gamma;
  Interval hpd_delta;
  double alpha;
};

inline BayesEstimates bayes_estimates(const PosteriorSample& post, const std::vector<double>& loss_params,
                                      double alpha = 0.05) {
  if (post.gamma_chain.empty() || post.gamma_chain.size() != post.delta_chain.size()) {
    throw std::invalid_argument("bayes_estimates: chains must be nonempty and of equal length");
  }
  BayesEstimates out{detail::chain_mean(post.gamma_chain), detail::chain_mean(post.delta_chain),
                     {}, hpd_interval(post.gamma_chain, alpha), hpd_interval(post.delta_chain, alpha),
                     alpha};
  for (double d : loss_params) {
    if (d == 0.0) {
      throw std::invalid_argument("LINEX loss parameter d = 0 is not allowed; use the squared-error estimate");
    }
    out.linex.emplace(d, WeibullParams(linex_estimate(post.gamma_chain, d),
                                       linex_estimate(post.delta_chain, d)));
  }
  return out;
}

// Loss functions for the simulation risk.
struct SquaredError {};
struct Linex {
  double d;
};
using Loss = std::variant<SquaredError, Linex>;

// Loss at true value theta for estimate est.
inline double loss_value(const Loss& loss, double theta, double est) {
  const double diff = theta - est;
  if (const auto* l = std::get_if<Linex>(&loss)) {
    return std::exp(l->d * diff) - l->d * diff - 1.0;
  }
  return diff * diff;
}

struct BiasRisk {
  double bias;
  double risk;
};

inline BiasRisk bias_and_risk(const std::vector<double>& estimates, double truth, const Loss& loss) {
  if (estimates.empty()) throw std::invalid_argument("bias_and_risk: no estimates");
  double b = 0.0, r = 0.0;
  for (double e : estimates) {
    b += e - truth;
    r += loss_value(loss, truth, e);
  }
  const double k = static_cast<double>(estimates.size());
  return {b / k, r / k};
}

} // namespace t1t2
