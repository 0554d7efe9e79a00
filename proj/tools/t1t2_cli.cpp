// t1t2: command-line front end for the T1-T2 mixture censoring library.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "t1t2.hpp"

namespace fs = std::filesystem;
using namespace t1t2;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_convergence = 3;

constexpr std::uint64_t fallback_seed = 20240601;

// T1T2_SEED replaces the built-in default; an explicit --seed still wins.
std::uint64_t default_seed() {
  if (const char* env = std::getenv("T1T2_SEED")) {
    const std::string_view s = io::trim(env);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::invalid_argument("T1T2_SEED must be a non-negative integer");
    }
    return v;
  }
  return fallback_seed;
}

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adds the provenance block and prints or writes the record.
void emit(io::KeyValueRecord rec, const std::string& report_path) {
  const auto hash = io::fnv1a(rec.str());
  rec.set("tool_version", std::string(version));
  rec.set("config_hash", io::hex64(hash));
  if (!report_path.empty()) io::write_text(report_path, rec.str());
  std::cout << rec.str();
}

void add_sample_summary(io::KeyValueRecord& rec, const CensoredSample& s) {
  rec.set("n", s.n());
  rec.set("m", s.scheme().m);
  rec.set("S", s.scheme().S);
  rec.set("case", std::string(to_string(s.kind())));
  rec.set("r", s.r());
  rec.set("U", s.U());
  rec.set("data_hash", io::hex64(io::fnv1a(io::join_doubles({s.failures().begin(), s.failures().end()}))));
}

std::string interval_text(const Interval& iv) {
  return io::format_double(iv.lower) + "," + io::format_double(iv.upper);
}

// Where the observations come from: raw data with optional scheme flags, or
// a record written by `censor`.
struct SampleSource {
  std::string input;
  std::size_t column = 0;
  std::optional<int> m;
  std::optional<double> S;
  std::string censored;

  void attach(CLI::App* sub) {
    sub->add_option("--input", input, "data file or builtin:precipitation");
    sub->add_option("--column", column, "0-based column for comma-delimited input");
    sub->add_option("--m", m, "failure count m (default n)");
    sub->add_option("--s", S, "extra time S (default 0)");
    sub->add_option("--censored", censored, "censored-sample record written by `censor`");
  }

  CensoredSample load(io::KeyValueRecord& rec) const {
    if (!censored.empty()) {
      if (!input.empty() || m || S) throw usage_error("--censored cannot be combined with --input, --m or --s");
      rec.set("input", censored);
      return io::censored_from_record(io::KeyValueRecord::load(censored));
    }
    if (input.empty()) throw usage_error("one of --input or --censored is required");
    const auto data = io::load_data(input, column);
    rec.set("input", input);
    if (column != 0) rec.set("column", column);
    const int n = static_cast<int>(data.size());
    const int mm = m.value_or(n);
    if (mm < 1 || mm > n) throw data_error("--m must lie in 1.." + std::to_string(n));
    return apply_scheme(data, CensoringScheme(n, mm, S.value_or(0.0)));
  }
};

// ---------------------------------------------------------------------------

struct CensorCmd {
  std::string input;
  std::size_t column = 0;
  int m = 0;
  double S = 0.0;
  std::string output;

  int run() const {
    const auto data = io::load_data(input, column);
    const int n = static_cast<int>(data.size());
    if (m < 1 || m > n) throw data_error("--m must lie in 1.." + std::to_string(n));
    const auto s = apply_scheme(data, CensoringScheme(n, m, S));
    const auto rec = io::to_record(s);
    if (output.empty()) {
      std::cout << rec.str();
    } else {
      io::write_text(output, rec.str());
      std::cout << "r = " << s.r() << "\ncase = " << to_string(s.kind()) << "\nU = " << io::format_double(s.U())
                << "\n";
    }
    return exit_ok;
  }
};

struct FitCmd {
  SampleSource source;
  MleConfig cfg;
  std::string report;

  int run() const {
    io::KeyValueRecord rec;
    rec.set("command", std::string("fit"));
    const auto s = source.load(rec);
    add_sample_summary(rec, s);
    rec.set("method", std::string("MLE"));
    rec.set("gamma_init", cfg.gamma_init);
    rec.set("tol", cfg.tol);
    rec.set("max_iter", cfg.max_iter);
    rec.set("alpha", cfg.alpha);
    rec.set("clip", std::string(cfg.clip_lower ? "true" : "false"));
    const auto res = fit_mle(s, cfg);
    rec.set("converged", std::string(res.converged ? "true" : "false"));
    rec.set("iterations", res.iterations);
    rec.set("gamma", res.params.gamma);
    rec.set("delta", res.params.delta);
    rec.set("loglik", res.loglik);
    rec.set("se_gamma", res.se_gamma);
    rec.set("se_delta", res.se_delta);
    rec.set("aci_level", 1.0 - cfg.alpha);
    rec.set("aci_gamma", res.aci_gamma ? interval_text(*res.aci_gamma) : std::string("undefined"));
    rec.set("aci_delta", res.aci_delta ? interval_text(*res.aci_delta) : std::string("undefined"));
    emit(rec, report);
    if (!res.converged) {
      std::cerr << "t1t2: fit did not converge in " << cfg.max_iter << " iterations\n";
      return exit_convergence;
    }
    return exit_ok;
  }
};

struct BayesCmd {
  SampleSource source;
  PriorSpec prior;
  int n_iter = 11000;
  int burn_in = 1000;
  std::optional<double> proposal_sd;
  std::optional<std::uint64_t> seed;
  std::vector<double> d_list{-1.0, 1.0};
  double alpha = 0.05;
  std::string save_chains;
  std::string report;

  int run() const {
    for (double d : d_list) {
      if (d == 0.0) {
        throw usage_error("--d 0 is not a LINEX parameter; the squared-error estimate is its limit and is always reported");
      }
    }
    io::KeyValueRecord rec;
    rec.set("command", std::string("bayes"));
    const auto s = source.load(rec);
    add_sample_summary(rec, s);
    McmcConfig cfg;
    cfg.chain_length = n_iter;
    cfg.burn_in = burn_in;
    cfg.proposal_sd = proposal_sd;
    cfg.seed = seed ? *seed : default_seed();
    const auto post = run_mh_gibbs(s, prior, cfg);
    const auto est = bayes_estimates(post, d_list, alpha);

    rec.set("prior", io::join_doubles({prior.alpha1, prior.beta1, prior.alpha2, prior.beta2}));
    rec.set("chain_length", n_iter);
    rec.set("burn_in", burn_in);
    rec.set("seed", std::to_string(cfg.seed));
    rec.set("proposal_sd", post.proposal_sd);
    rec.set("init", io::join_doubles({post.init.gamma, post.init.delta}));
    rec.set("acceptance_rate", post.acceptance_rate);
    rec.set("method.se", std::string("Bayes-SE"));
    rec.set("se.gamma", est.se_gamma);
    rec.set("se.delta", est.se_delta);
    for (const auto& [d, p] : est.linex) {
      const auto key = "linex[" + io::format_double(d) + "]";
      rec.set(key + ".gamma", p.gamma);
      rec.set(key + ".delta", p.delta);
    }
    rec.set("hpd_level", 1.0 - alpha);
    rec.set("hpd.gamma", interval_text(est.hpd_gamma));
    rec.set("hpd.delta", interval_text(est.hpd_delta));
    if (!save_chains.empty()) {
      std::string text = "gamma,delta\n";
      for (std::size_t i = 0; i < post.gamma_chain.size(); ++i) {
        text += io::format_double(post.gamma_chain[i]) + "," + io::format_double(post.delta_chain[i]) + "\n";
      }
      io::write_text(save_chains, text);
    }
    if (post.acceptance_warning) {
      std::cerr << "t1t2: warning: acceptance rate " << post.acceptance_rate << " outside [0.05, 0.95]\n";
    }
    emit(rec, report);
    return exit_ok;
  }
};

struct ExpectCmd {
  int n = 1;
  int m = 1;
  double S = 0.0;
  double gamma = 1.0;
  double delta = 1.0;
  std::string method = "quad";
  std::size_t reps = 100000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::optional<double> alpha_scale;
  bool product_integrand = false;
  std::string report;

  DurationReport compute(const CensoringScheme& sc, const WeibullParams& p, std::uint64_t sd) const {
    if (method == "mc") return expected_duration_mc(sc, p, reps, sd, workers);
    return expected_duration(sc, p, {product_integrand});
  }

  int run() const {
    if (product_integrand && method == "mc") throw usage_error("--product-integrand applies to --method quad only");
    const CensoringScheme sc(n, m, S);
    const WeibullParams p(gamma, delta);
    const std::uint64_t sd = seed ? *seed : default_seed();
    io::KeyValueRecord rec;
    rec.set("command", std::string("expect"));
    rec.set("n", n);
    rec.set("m", m);
    rec.set("S", S);
    rec.set("gamma", gamma);
    rec.set("delta", delta);
    rec.set("method", method);
    if (method == "mc") {
      rec.set("replications", reps);
      rec.set("seed", std::to_string(sd));
    } else {
      rec.set("integrand", std::string(product_integrand ? "marginal_product" : "survival"));
    }
    const auto r = compute(sc, p, sd);
    rec.set("expected_duration", r.expected_duration);
    rec.set("expected_failures", r.expected_failures);
    if (r.mc_std_error) {
      rec.set("duration_std_error", *r.mc_std_error);
      rec.set("failures_std_error", *r.failures_std_error);
    } else {
      rec.set("quadrature_error", r.quadrature_error);
      if (r.conditional_failures) rec.set("conditional_failures", *r.conditional_failures);
    }
    if (alpha_scale) {
      const double a = *alpha_scale;
      if (!(a > 0.0)) throw usage_error("--alpha-scale must be positive");
      const auto scaled = compute(CensoringScheme(n, m, a * S), WeibullParams(gamma, delta / std::pow(a, gamma)), sd);
      rec.set("alpha_scale", a);
      rec.set("scaled_expected_duration", scaled.expected_duration);
      rec.set("scaled_expected_failures", scaled.expected_failures);
      rec.set("ratio", scaled.expected_duration / r.expected_duration);
    }
    emit(rec, report);
    return exit_ok;
  }
};

struct GofCmd {
  std::string input;
  std::size_t column = 0;
  std::string plots;
  std::string report;

  int run() const {
    const auto data = io::load_data(input, column);
    const auto reports = compare_models(data);

    std::ostringstream table;
    table << std::left << std::setw(9) << "Model" << std::setw(22) << "Estimates" << std::right << std::setw(9)
          << "KS" << std::setw(9) << "p" << std::setw(11) << "-2logL" << std::setw(11) << "AIC" << std::setw(11)
          << "AICC" << std::setw(11) << "BIC" << std::setw(11) << "HQC" << "\n";
    table << std::fixed;
    io::KeyValueRecord rec;
    rec.set("command", std::string("gof"));
    rec.set("input", input);
    if (column != 0) rec.set("column", column);
    rec.set("n", data.size());
    for (const auto& fr : reports) {
      std::ostringstream est;
      est << std::fixed << std::setprecision(4);
      for (std::size_t i = 0; i < fr.estimates.size(); ++i) est << (i ? ", " : "") << fr.estimates[i];
      table << std::left << std::setw(9) << to_string(fr.model) << std::setw(22) << est.str() << std::right
            << std::setprecision(4) << std::setw(9) << fr.ks_stat << std::setw(9) << fr.p_value
            << std::setw(11) << fr.nll2 << std::setw(11) << fr.aic << std::setw(11)
            << (fr.aicc ? *fr.aicc : std::nan("")) << std::setw(11) << fr.bic << std::setw(11) << fr.hqc << "\n";
      const std::string k = to_string(fr.model);
      rec.set(k + ".estimates", io::join_doubles(fr.estimates));
      rec.set(k + ".ks", fr.ks_stat);
      rec.set(k + ".p_value", fr.p_value);
      rec.set(k + ".neg2loglik", fr.nll2);
      rec.set(k + ".aic", fr.aic);
      rec.set(k + ".aicc", fr.aicc ? io::format_double(*fr.aicc) : std::string("undefined"));
      rec.set(k + ".bic", fr.bic);
      rec.set(k + ".hqc", fr.hqc);
    }
    const auto& best = best_by_aic(reports);
    table << "best by AIC: " << to_string(best.model) << "\n";
    rec.set("best_by_aic", std::string(to_string(best.model)));
    std::cout << table.str();

    if (!plots.empty()) {
      const WeibullParams p(reports.front().estimates[0], reports.front().estimates[1]);
      for (const auto& f : export_plot_data(plots, plot_data(data, p))) std::cout << "wrote " << f.string() << "\n";
      rec.set("plots", plots);
    }
    const auto hash = io::fnv1a(rec.str());
    rec.set("tool_version", std::string(version));
    rec.set("config_hash", io::hex64(hash));
    if (!report.empty()) io::write_text(report, rec.str());
    return exit_ok;
  }
};

nlohmann::json summary_json(const EstimateSummary& s) {
  return {{"bias", s.bias}, {"mse", s.mse}, {"variance", s.variance}, {"bias_se", s.bias_se}, {"mse_se", s.mse_se}};
}

nlohmann::json interval_json(const IntervalSummary& s) { return {{"cl", s.cl}, {"cp", s.cp}, {"count", s.count}}; }

nlohmann::json scheme_json(const CensoringScheme& s) { return {{"n", s.n}, {"m", s.m}, {"S", s.S}}; }

nlohmann::json study_json(const StudyResult& r, const std::string& hash) {
  nlohmann::json j;
  j["tool_version"] = std::string(version);
  j["config_hash"] = hash;
  j["truth"] = {{"gamma", r.truth.gamma}, {"delta", r.truth.delta}};
  j["replications"] = r.replications;
  j["base_seed"] = r.base_seed;
  j["mle"] = nlohmann::json::array();
  for (const auto& row : r.mle_rows) {
    j["mle"].push_back({{"scheme", scheme_json(row.scheme)},
                        {"used", row.used},
                        {"dropped", row.dropped},
                        {"mean_failures", row.mean_failures},
                        {"gamma", summary_json(row.gamma)},
                        {"delta", summary_json(row.delta)},
                        {"aci_gamma", interval_json(row.aci_gamma)},
                        {"aci_delta", interval_json(row.aci_delta)}});
  }
  j["bayes"] = nlohmann::json::array();
  for (const auto& row : r.bayes_rows) {
    nlohmann::json linex = nlohmann::json::array();
    for (const auto& l : row.linex) {
      linex.push_back({{"d", l.d},
                       {"gamma", {{"bias", l.gamma.bias}, {"risk", l.gamma.risk}}},
                       {"delta", {{"bias", l.delta.bias}, {"risk", l.delta.risk}}}});
    }
    j["bayes"].push_back({{"scheme", scheme_json(row.scheme)},
                          {"used", row.used},
                          {"dropped", row.dropped},
                          {"acceptance_warnings", row.acceptance_warnings},
                          {"mean_acceptance", row.mean_acceptance},
                          {"se_gamma", {{"bias", row.se_gamma.bias}, {"risk", row.se_gamma.risk}}},
                          {"se_delta", {{"bias", row.se_delta.bias}, {"risk", row.se_delta.risk}}},
                          {"linex", linex},
                          {"hpd_gamma", interval_json(row.hpd_gamma)},
                          {"hpd_delta", interval_json(row.hpd_delta)}});
  }
  return j;
}

struct SimulateCmd {
  std::string config;
  std::string output_dir;
  std::optional<unsigned> workers;
  std::optional<std::size_t> replications;

  int run() const {
    auto rec = io::KeyValueRecord::load(config);
    if (!rec.has("seed")) rec.set("seed", std::to_string(default_seed()));
    if (replications) rec.set("replications", *replications);
    StudyConfig cfg;
    try {
      cfg = parse_study_config(rec);
    } catch (const data_error& e) {
      throw usage_error(config + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw usage_error(config + ": " + e.what());
    }
    // Worker count never changes results, so it stays out of the hash.
    if (workers) cfg.design.workers = *workers;
    const auto hash = io::hex64(io::fnv1a(rec.str()));
    const auto result = run_configured_study(cfg);

    const fs::path dir(output_dir);
    fs::create_directories(dir);
    std::vector<fs::path> written;
    const auto put = [&](const char* name, const std::string& text) {
      written.push_back(dir / name);
      io::write_text(written.back(), text);
    };
    if (!result.mle_rows.empty()) put("mle_table.csv", mle_table_csv(result));
    if (!result.bayes_rows.empty()) put("bayes_table.csv", bayes_table_csv(result));
    put("coverage_table.csv", coverage_table_csv(result));
    put("result.json", study_json(result, hash).dump(2) + "\n");
    auto resolved = rec;
    resolved.set("tool_version", std::string(version));
    resolved.set("config_hash", hash);
    put("run.txt", resolved.str());

    std::cout << coverage_table_csv(result);
    for (const auto& f : written) std::cout << "wrote " << f.string() << "\n";
    return exit_ok;
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weibull inference under T1-T2 mixture censoring"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  CensorCmd censor;
  auto* c = app.add_subcommand("censor", "apply a (m, S) scheme to complete data");
  c->add_option("--input", censor.input, "data file or builtin:precipitation")->required();
  c->add_option("--column", censor.column, "0-based column for comma-delimited input");
  c->add_option("--m", censor.m, "failure count m")->required();
  c->add_option("--s", censor.S, "extra time S")->required();
  c->add_option("--output", censor.output, "write the censored-sample record here");

  FitCmd fit;
  auto* f = app.add_subcommand("fit", "maximum likelihood estimates with asymptotic intervals");
  fit.source.attach(f);
  f->add_option("--alpha", fit.cfg.alpha, "1 - confidence level")->check(CLI::Range(1e-6, 0.5));
  f->add_option("--gamma-init", fit.cfg.gamma_init, "starting shape")->check(CLI::PositiveNumber);
  f->add_option("--tol", fit.cfg.tol, "convergence tolerance")->check(CLI::PositiveNumber);
  f->add_option("--max-iter", fit.cfg.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  f->add_flag("--clip", fit.cfg.clip_lower, "truncate negative lower bounds at 0");
  f->add_option("--report", fit.report, "also write the report to this file");

  BayesCmd bayes;
  auto* b = app.add_subcommand("bayes", "Bayes estimates by Metropolis-Hastings within Gibbs");
  bayes.source.attach(b);
  b->add_option("--a1", bayes.prior.alpha1, "gamma prior shape on gamma");
  b->add_option("--b1", bayes.prior.beta1, "gamma prior rate on gamma");
  b->add_option("--a2", bayes.prior.alpha2, "gamma prior shape on delta");
  b->add_option("--b2", bayes.prior.beta2, "gamma prior rate on delta");
  b->add_option("--n-iter", bayes.n_iter, "chain length N")->check(CLI::PositiveNumber);
  b->add_option("--burn-in", bayes.burn_in, "burn-in M")->check(CLI::NonNegativeNumber);
  b->add_option("--proposal-sd", bayes.proposal_sd, "random-walk sd for gamma")->check(CLI::PositiveNumber);
  b->add_option("--seed", bayes.seed, "RNG seed (default $T1T2_SEED or 20240601)");
  b->add_option("--d", bayes.d_list, "LINEX parameters, comma separated")->delimiter(',');
  b->add_option("--alpha", bayes.alpha, "1 - credible level")->check(CLI::Range(1e-6, 0.5));
  b->add_option("--save-chains", bayes.save_chains, "write post-burn-in draws as two-column CSV");
  b->add_option("--report", bayes.report, "also write the report to this file");

  ExpectCmd expect;
  auto* e = app.add_subcommand("expect", "expected test duration and failure count");
  e->add_option("--n", expect.n, "units on test")->required();
  e->add_option("--m", expect.m, "failure count m")->required();
  e->add_option("--s", expect.S, "extra time S")->required();
  e->add_option("--gamma", expect.gamma, "shape")->required();
  e->add_option("--delta", expect.delta, "rate")->required();
  e->add_option("--method", expect.method, "quad or mc")->check(CLI::IsMember({"quad", "mc"}));
  e->add_option("--reps", expect.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
  e->add_option("--seed", expect.seed, "RNG seed (default $T1T2_SEED or 20240601)");
  e->add_option("--workers", expect.workers, "threads for --method mc")->check(CLI::PositiveNumber);
  e->add_option("--alpha-scale", expect.alpha_scale, "also evaluate the time-rescaled model and print the ratio");
  e->add_flag("--product-integrand", expect.product_integrand, "use F_{m:n}(x + S) in the integrand");
  e->add_option("--report", expect.report, "also write the report to this file");

  GofCmd gof;
  auto* g = app.add_subcommand("gof", "fit Weibull, Lindley and inverse Weibull; compare");
  g->add_option("--input", gof.input, "data file or builtin:precipitation")->required();
  g->add_option("--column", gof.column, "0-based column for comma-delimited input");
  g->add_option("--plots", gof.plots, "directory for density/ECDF/PP/QQ point files");
  g->add_option("--report", gof.report, "write the machine-readable report here");

  SimulateCmd sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo study from a key = value config");
  s->add_option("--config", sim.config, "study configuration")->required();
  s->add_option("--output-dir", sim.output_dir, "directory for tables")->required();
  s->add_option("--workers", sim.workers, "worker threads")->check(CLI::PositiveNumber);
  s->add_option("--replications", sim.replications, "override replications")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*c) return censor.run();
    if (*f) return fit.run();
    if (*b) return bayes.run();
    if (*e) return expect.run();
    if (*g) return gof.run();
    if (*s) return sim.run();
  } catch (const usage_error& err) {
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_usage;
  } catch (const convergence_error& err) {
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_convergence;
  } catch (const data_error& err) {
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_data;
  } catch (const std::invalid_argument& err) {
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_usage;
  } catch (const std::logic_error& err) {
    // domain and range violations in the data
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_data;
  } catch (const std::exception& err) {
    std::cerr << "t1t2: " << err.what() << "\n";
    return exit_data;
  }
  return exit_usage;
}
