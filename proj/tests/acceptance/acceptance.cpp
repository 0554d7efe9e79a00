// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "t1t2.hpp"

using namespace t1t2;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << got << ", want " << want << " +/- " << tol;
    expect(std::abs(got - want) <= tol, os.str());
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::vector<double> precipitation() { return {io::precipitation.begin(), io::precipitation.end()}; }

// ---------------------------------------------------------------------------

void real_data_mle(Check& c) {
  struct Row {
    int m;
    double S, g, d, gl, gu, dl, du;
  };
  const Row rows[] = {{20, 1, 1.8461, 0.3099, 1.2618, 2.4304, 0.1307, 0.4891},
                      {20, 2, 1.8534, 0.3105, 1.3243, 2.3826, 0.1327, 0.4882},
                      {15, 1, 1.9386, 0.3042, 1.2786, 2.5985, 0.1259, 0.4825},
                      {15, 2, 1.9174, 0.3031, 1.3644, 2.4704, 0.1272, 0.4791}};
  const auto data = precipitation();
  for (const auto& r : rows) {
    const std::string tag = "(" + std::to_string(r.m) + "," + fmt(r.S, 0) + ") ";
    const auto fit = fit_mle(apply_scheme(data, {30, r.m, r.S}));
    c.expect(fit.converged, tag + "converged");
    c.expect(fit.aci_gamma && fit.aci_delta, tag + "intervals available");
    if (!fit.aci_gamma || !fit.aci_delta) continue;
    c.near(fit.params.gamma, r.g, 1e-3, tag + "gamma");
    c.near(fit.params.delta, r.d, 1e-3, tag + "delta");
    c.near(fit.aci_gamma->lower, r.gl, 1e-3, tag + "ACI gamma lower");
    c.near(fit.aci_gamma->upper, r.gu, 1e-3, tag + "ACI gamma upper");
    c.near(fit.aci_delta->lower, r.dl, 1e-3, tag + "ACI delta lower");
    c.near(fit.aci_delta->upper, r.du, 1e-3, tag + "ACI delta upper");
    c.note(tag + "gamma " + fmt(fit.params.gamma) + " delta " + fmt(fit.params.delta));
  }
}

void complete_fit(Check& c) {
  const auto reports = compare_models(precipitation());
  const auto& w = reports.at(0);
  c.near(w.estimates[0], 1.8089, 1e-3, "Weibull gamma");
  c.near(w.estimates[1], 0.3155, 1e-3, "Weibull delta");
  c.near(w.ks_stat, 0.0689, 5e-4, "KS D");
  c.near(w.p_value, 0.9988, 5e-3, "KS p");
  c.near(w.nll2, 77.2866, 1e-3, "-2logL");
  c.near(w.aic, 81.2866, 1e-3, "AIC");
  c.expect(w.aicc.has_value(), "AICC defined");
  if (w.aicc) c.near(*w.aicc, 81.7310, 1e-3, "AICC");
  c.near(w.bic, 84.0890, 1e-3, "BIC");
  c.near(w.hqc, 82.1831, 1e-3, "HQC");
  c.near(reports.at(1).estimates[0], 0.9096, 1e-3, "Lindley theta");
  c.expect(best_by_aic(reports).model == Model::Weibull, "Weibull selected by AIC");
  c.note("D " + fmt(w.ks_stat) + " p " + fmt(w.p_value) + " AIC " + fmt(w.aic));
}

void real_data_bayes(Check& c) {
  const auto s = apply_scheme(precipitation(), {30, 20, 1.0});
  const std::uint64_t seeds[] = {20240601, 1, 2, 3, 4};
  double lo_g = 1e300, hi_g = -1e300, lo_d = 1e300, hi_d = -1e300;
  for (auto seed : seeds) {
    McmcConfig cfg;  // N = 11000, M = 1000
    cfg.seed = seed;
    const auto post = run_mh_gibbs(s, {0, 0, 0, 0}, cfg);
    const auto est = bayes_estimates(post, {1.0});
    const std::string tag = "seed " + std::to_string(seed) + " ";
    c.near(est.se_gamma, 1.9131, 0.05, tag + "posterior mean gamma");
    c.near(est.se_delta, 0.2989, 0.05, tag + "posterior mean delta");
    c.near(est.hpd_gamma.lower, 1.4346, 0.08, tag + "HPD gamma lower");
    c.near(est.hpd_gamma.upper, 2.4902, 0.08, tag + "HPD gamma upper");
    c.near(est.hpd_delta.lower, 0.1677, 0.08, tag + "HPD delta lower");
    c.near(est.hpd_delta.upper, 0.5092, 0.08, tag + "HPD delta upper");
    lo_g = std::min(lo_g, est.se_gamma);
    hi_g = std::max(hi_g, est.se_gamma);
    lo_d = std::min(lo_d, est.se_delta);
    hi_d = std::max(hi_d, est.se_delta);
    c.note(tag + "mean (" + fmt(est.se_gamma) + ", " + fmt(est.se_delta) + ") HPD gamma (" +
           fmt(est.hpd_gamma.lower) + ", " + fmt(est.hpd_gamma.upper) + ") HPD delta (" +
           fmt(est.hpd_delta.lower) + ", " + fmt(est.hpd_delta.upper) + ") acceptance " +
           fmt(post.acceptance_rate, 3));
  }
  // Stability: seed-to-seed spread well inside the tolerance band.
  c.expect(hi_g - lo_g < 0.05 && hi_d - lo_d < 0.05, "posterior means stable across seeds");
  c.note("seed spread gamma " + fmt(hi_g - lo_g) + " delta " + fmt(hi_d - lo_d));
  // Deterministic reference for the same posterior.
  const std::vector<double> x(s.failures().begin(), s.failures().end());
  const auto ref = oracle::grid_posterior(x, s.n() - s.r(), s.U(), 0, 0, 0, 0, 6.0, 1.5);
  c.note("grid quadrature: mean (" + fmt(ref.mean_gamma) + ", " + fmt(ref.mean_delta) + ") HPD gamma (" +
         fmt(ref.hpd_gamma_lo) + ", " + fmt(ref.hpd_gamma_hi) + ") HPD delta (" + fmt(ref.hpd_delta_lo) + ", " +
         fmt(ref.hpd_delta_hi) + ")");
}

void simulation_subset(Check& c) {
  struct Cell {
    int n, m;
    double bg, bd, mg, md;
  };
  struct Block {
    WeibullParams truth;
    std::vector<Cell> cells;
  };
  const Block blocks[] = {
      {{1.0, 1.0},
       {{100, 100, 0.0101, 0.0077, 0.0064, 0.0115},
        {60, 50, 0.0264, 0.0153, 0.0161, 0.0205},
        {30, 30, 0.0472, 0.0284, 0.0274, 0.0454},
        {15, 15, 0.0992, 0.0558, 0.0722, 0.1133}}},
      {{1.5, 2.0},
       {{100, 100, 0.0151, 0.0291, 0.0144, 0.0466},
        {60, 50, 0.0365, 0.0641, 0.0333, 0.1009},
        {30, 30, 0.0709, 0.1234, 0.0616, 0.2104},
        {15, 15, 0.1488, 0.2633, 0.1625, 0.6763}}}};
  for (const auto& b : blocks) {
    StudyDesign d;
    d.truth = b.truth;
    d.replications = 1000;
    d.base_seed = 20240601;
    for (const auto& cell : b.cells) d.schemes.emplace_back(cell.n, cell.m, 0.1);
    const auto res = run_mle_study(d);
    for (std::size_t i = 0; i < b.cells.size(); ++i) {
      const auto& row = res.mle_rows[i];
      const auto& cell = b.cells[i];
      const std::string tag = "truth (" + fmt(b.truth.gamma, 1) + "," + fmt(b.truth.delta, 1) + ") " +
                              detail::scheme_label(row.scheme) + " ";
      c.near(row.gamma.bias, cell.bg, std::max(0.01, 3 * row.gamma.bias_se), tag + "bias gamma");
      c.near(row.delta.bias, cell.bd, std::max(0.01, 3 * row.delta.bias_se), tag + "bias delta");
      c.near(row.gamma.mse, cell.mg, std::max(0.25 * cell.mg, 3 * row.gamma.mse_se), tag + "MSE gamma");
      c.near(row.delta.mse, cell.md, std::max(0.25 * cell.md, 3 * row.delta.mse_se), tag + "MSE delta");
      for (const auto& [name, iv] : {std::pair{"gamma", row.aci_gamma}, std::pair{"delta", row.aci_delta}}) {
        c.expect(iv.cp >= 0.92 && iv.cp <= 0.98, tag + "ACI coverage " + name + " " + fmt(iv.cp, 3));
      }
      c.note(tag + "bias (" + fmt(row.gamma.bias) + ", " + fmt(row.delta.bias) + ") MSE (" + fmt(row.gamma.mse) +
             ", " + fmt(row.delta.mse) + ") CP (" + fmt(row.aci_gamma.cp, 3) + ", " + fmt(row.aci_delta.cp, 3) +
             ") dropped " + std::to_string(row.dropped));
    }
  }
}

void bayes_properties(Check& c) {
  StudyDesign d;
  d.truth = {1.0, 1.0};
  d.replications = 1000;
  d.base_seed = 20240601;
  d.prior = {1, 1, 1, 1};
  d.loss_params = {-1.0, 1.0};
  d.schemes = {{30, 30, 0.1}, {30, 20, 0.1}, {15, 15, 0.1}, {15, 12, 0.1}, {15, 10, 0.1}, {15, 7, 0.1}};
  const auto res = coverage_table(d);

  // (a) d = -1 overestimates, d = +1 underestimates.
  for (std::size_t i : {0u, 1u, 2u, 5u}) {
    const auto& row = res.bayes_rows[i];
    const auto tag = detail::scheme_label(row.scheme) + " ";
    const auto& neg = row.linex[0];
    const auto& pos = row.linex[1];
    c.expect(neg.gamma.bias > 0 && pos.gamma.bias < 0,
             tag + "LINEX sign flip gamma: " + fmt(neg.gamma.bias) + " / " + fmt(pos.gamma.bias));
    c.expect(neg.delta.bias > 0 && pos.delta.bias < 0,
             tag + "LINEX sign flip delta: " + fmt(neg.delta.bias) + " / " + fmt(pos.delta.bias));
    c.note(tag + "SE bias (" + fmt(row.se_gamma.bias) + ", " + fmt(row.se_delta.bias) + ") LINEX d=-1 (" +
           fmt(neg.gamma.bias) + ", " + fmt(neg.delta.bias) + ") d=1 (" + fmt(pos.gamma.bias) + ", " +
           fmt(pos.delta.bias) + ")");
    c.note(tag + "LINEX minus SE estimate d=-1 (" + fmt(neg.gamma.bias - row.se_gamma.bias) + ", " +
           fmt(neg.delta.bias - row.se_delta.bias) + ") d=1 (" + fmt(pos.gamma.bias - row.se_gamma.bias) + ", " +
           fmt(pos.delta.bias - row.se_delta.bias) + ")");
  }

  // (b) squared-error row at (30, 30, 0.1).
  const auto& r = res.bayes_rows[0];
  c.near(r.se_gamma.bias, 0.0065, 0.02, "(30,30,0.1) SE bias gamma");
  c.near(r.se_delta.bias, 0.0269, 0.02, "(30,30,0.1) SE bias delta");
  c.near(r.se_gamma.risk, 0.0206, 0.5 * 0.0206, "(30,30,0.1) SE risk gamma");
  c.near(r.se_delta.risk, 0.0409, 0.5 * 0.0409, "(30,30,0.1) SE risk delta");
  c.note("(30,30,0.1) SE risk (" + fmt(r.se_gamma.risk) + ", " + fmt(r.se_delta.risk) + ")");

  // (c) HPD no longer than ACI on the n = 15 schemes.
  for (std::size_t i = 2; i < res.bayes_rows.size(); ++i) {
    const auto& b = res.bayes_rows[i];
    const auto& m = res.mle_rows[i];
    const auto tag = detail::scheme_label(b.scheme) + " ";
    c.expect(b.hpd_gamma.cl <= m.aci_gamma.cl,
             tag + "HPD CL gamma " + fmt(b.hpd_gamma.cl) + " vs ACI " + fmt(m.aci_gamma.cl));
    c.expect(b.hpd_delta.cl <= m.aci_delta.cl,
             tag + "HPD CL delta " + fmt(b.hpd_delta.cl) + " vs ACI " + fmt(m.aci_delta.cl));
    c.note(tag + "CL gamma HPD " + fmt(b.hpd_gamma.cl) + " ACI " + fmt(m.aci_gamma.cl) + ", delta HPD " +
           fmt(b.hpd_delta.cl) + " ACI " + fmt(m.aci_delta.cl));
  }
}

void expectation_oracle(Check& c) {
  const WeibullParams p{1.5, 2.0};
  std::uint64_t cell = 0;
  double worst = 0.0;
  for (int n : {5, 10, 20}) {
    for (int m : {std::max(1, n / 5), n / 2, n}) {
      for (double S : {0.1, 0.5}) {
        const CensoringScheme sc(n, m, S);
        const auto q = expected_duration(sc, p);
        const auto mc = expected_duration_mc(sc, p, 1000000, derive_seed(20240601, cell++));
        const double z = std::abs(q.expected_duration - mc.expected_duration) / *mc.mc_std_error;
        worst = std::max(worst, z);
        c.expect(z <= 3.0, detail::scheme_label(sc) + " quadrature " + fmt(q.expected_duration, 6) + " vs MC " +
                               fmt(mc.expected_duration, 6) + " (z " + fmt(z, 2) + ")");
      }
    }
  }
  c.note("largest |z| over 18 cells " + fmt(worst, 2));
  for (double a : {0.1, 2.5, 10.0}) {
    const auto rep = check_scale_invariance({10, 5, 0.3}, p, a, 20000, 11);
    c.expect(rep.ratio_error < 1e-6, "ratio at alpha " + fmt(a, 1) + " off by " + fmt(rep.ratio_error, 10));
    c.expect(rep.failures_pass, "failure-count chi-square at alpha " + fmt(a, 1) + " p " + fmt(rep.chi_square_p));
    c.note("alpha " + fmt(a, 1) + ": ratio error " + fmt(rep.ratio_error, 12) + ", chi-square p " +
           fmt(rep.chi_square_p, 3));
  }
}

void numeric_suite(Check& c) {
  const auto s = apply_scheme(precipitation(), {30, 20, 1.0});
  double worst_grad = 0.0, worst_hess = 0.0;
  for (double g : {0.8, 1.5, 2.4}) {
    for (double d : {0.15, 0.3, 0.7}) {
      const auto sc = score(s, {g, d});
      const double fg = oracle::derivative([&](double x) { return log_likelihood(s, {x, d}); }, g, 1e-5);
      const double fd = oracle::derivative([&](double x) { return log_likelihood(s, {g, x}); }, d, 1e-6);
      worst_grad = std::max({worst_grad, std::abs(sc.d_gamma - fg), std::abs(sc.d_delta - fd)});
      const auto info = observed_information(s, {g, d});
      const auto ll = [&](double x, double y) { return log_likelihood(s, {x, y}); };
      const double h11 = -oracle::second_derivative([&](double x) { return ll(x, d); }, g, 1e-4);
      const double h22 = -oracle::second_derivative([&](double y) { return ll(g, y); }, d, 1e-5);
      const double h12 = -oracle::mixed_partial(ll, g, d, 1e-4);
      worst_hess = std::max({worst_hess, std::abs(info.a11 - h11) / std::abs(h11),
                             std::abs(info.a22 - h22) / std::abs(h22), std::abs(info.a12 - h12) / std::abs(h12)});
    }
  }
  c.expect(worst_grad < 1e-6, "score vs finite difference " + std::to_string(worst_grad));
  c.expect(worst_hess < 1e-4, "Hessian vs finite difference (relative) " + std::to_string(worst_hess));

  const PriorSpec pr{0, 0, 2, 1};
  const auto [shape, rate] = conditional_delta_params(1.8, s, pr);
  rng gen(20240601);
  std::vector<double> draws(100000);
  for (auto& v : draws) v = sample_conditional_delta(1.8, s, pr, gen);
  const double ks = oracle::ks_distance(draws, [&, sh = shape, rt = rate](double x) { return oracle::gamma_p(sh, rt * x); });
  c.expect(ks < 0.01, "Gibbs delta step KS " + fmt(ks, 5));

  double worst_mass = 0.0;
  for (const WeibullParams wp : {WeibullParams{1.5, 2.0}, WeibullParams{0.7, 1.0}}) {
    for (int n : {1, 5, 12}) {
      for (int i = 1; i <= n; ++i) {
        const double hi = std::pow(60.0 / wp.delta, 1.0 / wp.gamma);
        const double mass =
            oracle::simpson_log([&](double t) { return order_stat_pdf(t, i, n, wp); }, 1e-14, hi, 200000);
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
      }
    }
  }
  c.expect(worst_mass < 1e-8, "order-statistic density mass off by " + std::to_string(worst_mass));

  const auto chain = sample_weibull(5000, {1.5, 2.0}, 3);
  const double mean = oracle::mean(chain);
  const double lx = std::max(std::abs(linex_estimate(chain, 1e-6) - mean), std::abs(linex_estimate(chain, -1e-6) - mean));
  c.expect(lx < 1e-4, "LINEX small-d gap " + std::to_string(lx));
  c.note("score " + std::to_string(worst_grad) + ", Hessian " + std::to_string(worst_hess) + ", KS " + fmt(ks, 5) +
         ", mass " + std::to_string(worst_mass) + ", LINEX " + std::to_string(lx));
}

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" T1T2_CLI "' " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, {}};
  std::string out;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void determinism(Check& c) {
  const auto dir = fs::temp_directory_path() / "t1t2_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::vector<std::string> commands{
      "censor --input builtin:precipitation --m 20 --s 1",
      "fit --input builtin:precipitation --m 15 --s 2",
      "bayes --input builtin:precipitation --m 20 --s 1 --n-iter 3000 --burn-in 500",
      "bayes --input builtin:precipitation --m 15 --s 1 --seed 9 --a1 1 --b1 1 --a2 1 --b2 1 --n-iter 3000",
      "expect --n 10 --m 5 --s 0.3 --gamma 1.5 --delta 2",
      "gof --input builtin:precipitation"};
  for (const auto& cmd : commands) {
    const auto a = run_cli(cmd);
    const auto b = run_cli(cmd);
    c.expect(a.code == 0, "exit status of: " + cmd);
    c.expect(a.out == b.out && !a.out.empty(), "byte-identical rerun: " + cmd);
  }
  const std::string mc = "expect --n 10 --m 5 --s 0.3 --gamma 1.5 --delta 2 --method mc --reps 20000 --workers ";
  c.expect(run_cli(mc + "1").out == run_cli(mc + "4").out, "expect --method mc across worker counts");

  std::ofstream(dir / "study.cfg") << "schemes = 15:10:0.1; 30:20:0.2\nreplications = 20\nseed = 5\nmode = both\n"
                                      "mcmc.chain_length = 600\nmcmc.burn_in = 100\n";
  const std::vector<std::string> outs{"w1a", "w1b", "w4"};
  const std::vector<std::string> workers{"1", "1", "4"};
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const auto r = run_cli("simulate --config " + d + "/study.cfg --output-dir " + d + "/" + outs[i] +
                           " --workers " + workers[i]);
    c.expect(r.code == 0, "simulate exit status");
  }
  for (const char* f : {"mle_table.csv", "bayes_table.csv", "coverage_table.csv", "result.json"}) {
    const auto ref = slurp(dir / "w1a" / f);
    c.expect(!ref.empty(), std::string("simulate wrote ") + f);
    c.expect(ref == slurp(dir / "w1b" / f), std::string("simulate rerun identical: ") + f);
    c.expect(ref == slurp(dir / "w4" / f), std::string("simulate 1 vs 4 workers identical: ") + f);
  }
  fs::remove_all(dir);
  c.note(std::to_string(commands.size()) + " commands rerun, study compared across 1 and 4 workers");
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> body;
  };
  const std::vector<Criterion> criteria{
      {1, "real-data MLE and ACI", real_data_mle},
      {2, "complete-data fit and model comparison", complete_fit},
      {3, "real-data Bayes estimates and HPD", real_data_bayes},
      {4, "MLE simulation subset", simulation_subset},
      {5, "Bayes property suite", bayes_properties},
      {6, "expected duration oracle and scaling", expectation_oracle},
      {7, "numerical consistency", numeric_suite},
      {8, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << cr.id << ": " << cr.name << " (" << fmt(secs, 1)
              << " s)\n";
    for (const auto& n : c.notes) std::cout << "    " << n << "\n";
    for (const auto& f : c.failures) std::cout << "    failed: " << f << "\n";
    std::cout.flush();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
