#pragma once

#include <set>
#include <string>
#include <vector>

#include "t1t2/io.hpp"
#include "t1t2/sim_study.hpp"

namespace t1t2 {

enum class StudyMode { mle, bayes, both };

struct StudyConfig {
  StudyDesign design;
  StudyMode mode = StudyMode::mle;
};

// Schemes are written "n:m:S" separated by ';', or the word "default" for
// the full published grid.
inline std::vector<CensoringScheme> parse_schemes(std::string_view text) {
  if (io::trim(text) == "default") return default_scheme_grid();
  std::vector<CensoringScheme> out;
  for (auto item : io::split(text, ';')) {
    item = io::trim(item);
    if (item.empty()) continue;
    const auto parts = io::split(item, ':');
    double n = 0, m = 0, S = 0;
    if (parts.size() != 3 || !io::parse_double(parts[0], n) || !io::parse_double(parts[1], m) ||
        !io::parse_double(parts[2], S) || n != std::floor(n) || m != std::floor(m)) {
      throw std::invalid_argument("scheme '" + std::string(item) + "' is not n:m:S");
    }
    out.emplace_back(static_cast<int>(n), static_cast<int>(m), S);
  }
  if (out.empty()) throw std::invalid_argument("schemes: empty list");
  return out;
}

// Flat declarative study configuration. Unknown keys are rejected.
//
//   truth.gamma = 1.5
//   truth.delta = 2
//   schemes = 100:100:0.1; 60:50:0.1
//   replications = 1000
//   seed = 42
//   mode = mle            # mle | bayes | both
//   alpha = 0.05
//   workers = 4
//   prior.alpha1 = 1 ... prior.beta2 = 1
//   mcmc.chain_length = 3000
//   mcmc.burn_in = 500
//   mcmc.proposal_sd = auto
//   loss = -1, 1
//   mle.gamma_init = 1, mle.tol = 1e-8, mle.max_iter = 500
inline StudyConfig parse_study_config(const io::KeyValueRecord& rec) {
  static const std::set<std::string> known{
      "truth.gamma",   "truth.delta",  "schemes",       "replications",      "seed",
      "mode",          "alpha",        "workers",       "prior.alpha1",      "prior.beta1",
      "prior.alpha2",  "prior.beta2",  "mcmc.chain_length", "mcmc.burn_in", "mcmc.proposal_sd",
      "loss",          "mle.gamma_init", "mle.tol",     "mle.max_iter"};
  for (const auto& [k, v] : rec.entries()) {
    if (!known.contains(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  }
  StudyConfig cfg;
  auto& d = cfg.design;
  const auto num = [&](const char* key, double fallback) {
    return rec.has(key) ? rec.get_double(key) : fallback;
  };
  const auto integer = [&](const char* key, long long fallback) {
    return rec.has(key) ? rec.get_int(key) : fallback;
  };
  d.truth = WeibullParams(num("truth.gamma", 1.0), num("truth.delta", 1.0));
  if (!rec.has("schemes")) throw std::invalid_argument("config: 'schemes' is required");
  d.schemes = parse_schemes(rec.get("schemes"));
  const long long reps = integer("replications", 1000);
  if (reps < 1) throw std::invalid_argument("config: replications must be >= 1");
  d.replications = static_cast<std::size_t>(reps);
  d.base_seed = static_cast<std::uint64_t>(integer("seed", 1));
  d.alpha = num("alpha", 0.05);
  d.mle.alpha = d.alpha;
  const long long workers = integer("workers", 1);
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  d.workers = static_cast<unsigned>(workers);
  d.prior = {num("prior.alpha1", 1.0), num("prior.beta1", 1.0), num("prior.alpha2", 1.0),
             num("prior.beta2", 1.0)};
  d.mcmc.chain_length = static_cast<int>(integer("mcmc.chain_length", d.mcmc.chain_length));
  d.mcmc.burn_in = static_cast<int>(integer("mcmc.burn_in", d.mcmc.burn_in));
  if (rec.has("mcmc.proposal_sd") && rec.get("mcmc.proposal_sd") != "auto") {
    d.mcmc.proposal_sd = rec.get_double("mcmc.proposal_sd");
  }
  if (rec.has("loss")) d.loss_params = io::parse_double_list(rec.get("loss"), "loss");
  d.mle.gamma_init = num("mle.gamma_init", d.mle.gamma_init);
  d.mle.tol = num("mle.tol", d.mle.tol);
  d.mle.max_iter = static_cast<int>(integer("mle.max_iter", d.mle.max_iter));
  if (rec.has("mode")) {
    const auto& m = rec.get("mode");
    if (m == "mle") cfg.mode = StudyMode::mle;
    else if (m == "bayes") cfg.mode = StudyMode::bayes;
    else if (m == "both") cfg.mode = StudyMode::both;
    else throw std::invalid_argument("config: mode must be mle, bayes or both");
  }
  d.validate();
  return cfg;
}

inline StudyResult run_configured_study(const StudyConfig& cfg) {
  switch (cfg.mode) {
    case StudyMode::mle: return run_mle_study(cfg.design);
    case StudyMode::bayes: return run_bayes_study(cfg.design);
    case StudyMode::both: return coverage_table(cfg.design);
  }
  return {};
}

} // namespace t1t2
