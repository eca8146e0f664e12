// Command-line front end. Every subcommand prints a JSON document (to --out
// when given) and exits 0 when its declared bands pass, 1 when a band fails,
// and 2 on usage or input errors.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpminimax/bounds.hpp"
#include "dpminimax/codes.hpp"
#include "dpminimax/couplings.hpp"
#include "dpminimax/harness.hpp"
#include "dpminimax/io.hpp"
#include "dpminimax/mechanisms.hpp"
#include "dpminimax/packings.hpp"

using namespace dpminimax;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

int emit(const Globals& g, const Json& doc, bool passed = true) {
  const std::string text = doc.dump(2) + "\n";
  if (g.out.empty())
    std::cout << text;
  else
    write_text_file(g.out, text);
  return passed ? 0 : 1;
}

double parse_real(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size()) throw Error("not a number: '" + s + "'");
  return x;
}

// --- bounds -----------------------------------------------------------------

void add_bounds(CLI::App& app, const Globals& g, int& rc) {
  auto* bounds = app.add_subcommand("bounds", "Evaluate the private lower bounds")->require_subcommand(1);

  struct LeCam {
    double tv = 0, D = 0, delta = 0;
    std::string eps = "1";
  };
  static LeCam lc;
  auto* lecam = bounds->add_subcommand("lecam", "Two-point bound");
  lecam->add_option("--tv", lc.tv, "TV distance of the n-sample laws")->required();
  lecam->add_option("--D", lc.D, "Expected Hamming distance of the coupling")->required();
  lecam->add_option("--eps", lc.eps, "Epsilon (accepts inf)");
  lecam->add_option("--delta", lc.delta, "Delta");
  lecam->callback([&] {
    rc = emit(g, to_json(le_cam_bound(lc.tv, lc.D, PrivacyBudget(parse_real(lc.eps), lc.delta))));
  });

  struct Fano {
    double alpha = 0, beta = 0, D = 0, M = 2;
    std::string eps = "1";
  };
  static Fano fa;
  auto* fano = bounds->add_subcommand("fano", "Multiple-hypothesis bound (pure DP)");
  fano->add_option("--alpha", fa.alpha, "Pairwise loss separation")->required();
  fano->add_option("--beta", fa.beta, "Pairwise KL cap of the n-sample laws")->required();
  fano->add_option("--D", fa.D, "Pairwise coupling Hamming cap")->required();
  fano->add_option("--M", fa.M, "Number of hypotheses")->required();
  fano->add_option("--eps", fa.eps, "Epsilon (accepts inf)");
  fano->callback([&] {
    rc = emit(g, to_json(fano_bound(fa.alpha, fa.beta, fa.D, fa.M, parse_real(fa.eps))));
  });

  struct Assouad {
    std::size_t k = 1;
    double tau = 0, D = 0, delta = 0;
    std::string eps = "1";
  };
  static Assouad as;
  auto* assouad = bounds->add_subcommand("assouad", "Hypercube bound");
  assouad->add_option("--k", as.k, "Hypercube dimension")->required();
  assouad->add_option("--tau", as.tau, "Per-coordinate loss")->required();
  assouad->add_option("--D", as.D, "Coupling Hamming distance")->required();
  assouad->add_option("--eps", as.eps, "Epsilon (accepts inf)");
  assouad->add_option("--delta", as.delta, "Delta");
  assouad->callback([&] {
    rc = emit(g, to_json(assouad_bound(as.k, as.tau, as.D, PrivacyBudget(parse_real(as.eps), as.delta))));
  });

  struct Corollary {
    double alpha = 0, beta = 0, gamma = 0, M = 2, eps = 1, tau = 0;
  };
  static Corollary co;
  auto* coro = bounds->add_subcommand("corollary", "Sample-size thresholds of the packing argument");
  coro->add_option("--alpha", co.alpha, "Separation (>= 3 tau)")->required();
  coro->add_option("--beta", co.beta, "Per-sample KL cap")->required();
  coro->add_option("--gamma", co.gamma, "Per-sample TV cap")->required();
  coro->add_option("--M", co.M, "Packing size")->required();
  coro->add_option("--eps", co.eps, "Epsilon");
  coro->add_option("--tau", co.tau, "Target risk")->required();
  coro->callback([&] {
    const auto t = fano_sample_complexity(co.alpha, co.beta, co.gamma, co.M, co.eps, co.tau);
    rc = emit(g, Json{{"n_classical", t.n_classical},
                      {"n_private", t.n_private},
                      {"n_lower", std::max(t.n_classical, t.n_private)}});
  });

  static double pk_M = 2, pk_d = 1;
  auto* packing = bounds->add_subcommand("packing", "ln M / d");
  packing->add_option("--M", pk_M)->required();
  packing->add_option("--d", pk_d)->required();
  packing->callback([&] { rc = emit(g, Json{{"value", packing_bound(pk_M, pk_d)}}); });

  static double gr_eps = 1, gr_delta = 0;
  static std::uint64_t gr_t = 1;
  auto* group = bounds->add_subcommand("group", "Group-privacy factor at distance t");
  group->add_option("--eps", gr_eps);
  group->add_option("--delta", gr_delta);
  group->add_option("--t", gr_t)->required();
  group->callback([&] {
    const auto f = group_privacy_factor(PrivacyBudget(gr_eps, gr_delta), gr_t);
    rc = emit(g, Json{{"multiplier", f.multiplier}, {"additive", f.additive}});
  });

  struct Table {
    std::string problem;
    ProblemParams params;
    double eps = 1, delta = 0;
  };
  static Table tb;
  auto* table = bounds->add_subcommand("table", "Sample-complexity rows");
  table->add_option("--problem", tb.problem, "kary_tv, kary_l2, product or gmix")->required();
  table->add_option("--k", tb.params.k)->required();
  table->add_option("--d", tb.params.d);
  table->add_option("--alpha", tb.params.alpha)->required();
  table->add_option("--R", tb.params.R);
  table->add_option("--eps", tb.eps);
  table->add_option("--delta", tb.delta);
  table->callback([&] {
    rc = emit(g, to_json(sample_complexity_table(parse_problem(tb.problem), tb.params,
                                                 PrivacyBudget(tb.eps, tb.delta))));
  });
}

// --- codes ------------------------------------------------------------------

void add_codes(CLI::App& app, const Globals& g, int& rc) {
  auto* codes = app.add_subcommand("codes", "Gilbert-Varshamov codes")->require_subcommand(1);
  struct Gen {
    std::string type = "cw";
    std::size_t k = 0, l = 0, d = 0;
    std::uint32_t h = 2;
    std::optional<std::size_t> max_words;
    bool randomized = false;
  };
  static Gen gen;
  auto* sub = codes->add_subcommand("gen", "Greedy construction with exact verification");
  sub->add_option("--type", gen.type, "cw (constant weight) or qary")
      ->check(CLI::IsMember({"cw", "qary"}));
  sub->add_option("--k", gen.k, "Length of a constant-weight code");
  sub->add_option("--l", gen.l, "Weight of a constant-weight code");
  sub->add_option("--q", gen.h, "Alphabet size of a q-ary code");
  sub->add_option("--d", gen.d, "Length of a q-ary code");
  sub->add_option("--max-words", gen.max_words, "Stop after this many words");
  sub->add_flag("--randomized", gen.randomized, "Seeded random candidates instead of enumeration");
  sub->callback([&] {
    CodeOptions opt;
    opt.randomized = gen.randomized;
    opt.seed = g.seed;
    const Code code = gen.type == "cw" ? gv_constant_weight(gen.k, gen.l, gen.max_words, opt)
                                       : gv_qary(gen.h, gen.d, gen.max_words, opt);
    Json doc = to_json(code);
    bool ok = code.meets_size_bound();
    if (code.size() >= 2) {
      const auto dmin = min_distance(code);
      doc["verified_min_distance"] = dmin;
      ok = ok && dmin >= code.claimed_min_distance;
    }
    doc["pass"] = ok;
    rc = emit(g, doc, ok);
  });
}

// --- packings ---------------------------------------------------------------

void add_pack(CLI::App& app, const Globals& g, int& rc) {
  auto* pack = app.add_subcommand("pack", "Hard-instance families")->require_subcommand(1);
  struct Gen {
    std::string kind;
    std::size_t k = 0, d = 1, n = 1;
    double alpha = 0, R = 1;
    std::optional<std::size_t> max_members;
    std::size_t inner_words = 16;
    bool unbalanced = false, verify = false;
    std::size_t mc_samples = 0;
  };
  static Gen gen;
  auto* sub = pack->add_subcommand("gen", "Build a family (and optionally verify it)");
  sub->add_option("--kind", gen.kind)
      ->required()
      ->check(CLI::IsMember({"kary_tv", "kary_l2", "product", "gmix", "assouad_kary", "assouad_product"}));
  sub->add_option("--k", gen.k);
  sub->add_option("--d", gen.d);
  sub->add_option("--n", gen.n, "Sample size (hypercube families)");
  sub->add_option("--alpha", gen.alpha)->required();
  sub->add_option("--R", gen.R);
  sub->add_option("--max-members", gen.max_members);
  sub->add_option("--inner-words", gen.inner_words);
  sub->add_flag("--unbalanced", gen.unbalanced, "Product packing without the balanced offset");
  sub->add_flag("--verify", gen.verify);
  sub->add_option("--mc-samples", gen.mc_samples, "Monte Carlo TV samples for mixtures");
  sub->callback([&] {
    VerifyOptions vopt;
    vopt.mc_samples = gen.mc_samples;
    vopt.seed = g.seed;
    if (gen.kind == "assouad_kary" || gen.kind == "assouad_product") {
      const auto cube = gen.kind == "assouad_kary" ? assouad_kary_family(gen.k, gen.alpha, gen.n)
                                                   : assouad_product_family(gen.d, gen.alpha, gen.n);
      Json doc = to_json(cube);
      bool ok = true;
      if (gen.verify) {
        const auto rep = verify_hypercube(cube, vopt);
        doc["verification"] = to_json(rep);
        ok = rep.decomposition_ok;
      }
      rc = emit(g, doc, ok);
      return;
    }
    PackingFamily fam;
    if (gen.kind == "kary_tv") fam = kary_tv_packing(gen.k, gen.alpha, gen.max_members);
    if (gen.kind == "kary_l2") fam = kary_l2_packing(gen.k, gen.alpha, gen.max_members);
    if (gen.kind == "product")
      fam = product_packing(gen.k, gen.d, gen.alpha, !gen.unbalanced, gen.max_members, gen.inner_words);
    if (gen.kind == "gmix") {
      GaussianPackingOptions opt;
      opt.inner_words = gen.inner_words;
      opt.max_members = gen.max_members;
      opt.seed = g.seed;
      fam = gaussian_mixture_packing(gen.k, gen.d, gen.alpha, gen.R, opt);
    }
    Json doc = to_json(fam);
    bool ok = true;
    if (gen.verify) {
      vopt.member_cap = 2000;
      const auto rep = verify_family(fam, vopt);
      doc["verification"] = to_json(rep);
      ok = rep.passed();
    }
    rc = emit(g, doc, ok);
  });

  static std::string file;
  static std::size_t mc = 0;
  auto* verify = pack->add_subcommand("verify", "Verify a family stored as JSON");
  verify->add_option("file", file)->required()->check(CLI::ExistingFile);
  verify->add_option("--mc-samples", mc);
  verify->callback([&] {
    const Json j = read_json_file(file);
    VerifyOptions vopt;
    vopt.mc_samples = mc;
    vopt.seed = g.seed;
    if (j.value("type", std::string()) == "hypercube") {
      const auto rep = verify_hypercube(hypercube_from_json(j), vopt);
      rc = emit(g, to_json(rep), rep.decomposition_ok);
    } else {
      const auto rep = verify_family(family_from_json(j), vopt);
      rc = emit(g, to_json(rep), rep.passed());
    }
  });
}

// --- couplings --------------------------------------------------------------

void add_couple(CLI::App& app, const Globals& g, int& rc) {
  auto* couple = app.add_subcommand("couple", "Coupling samplers")->require_subcommand(1);
  struct Run {
    std::string kind;
    std::vector<double> p, q;
    std::size_t k = 0, d = 0, n = 1, i = 0, trials = 10000, marginal_trials = 0;
    double alpha = 0, band_sigma = 3, marginal_tol = 0.02;
  };
  static Run r;
  auto* run = couple->add_subcommand("run", "Empirical Hamming distance and marginal checks");
  run->add_option("--kind", r.kind)->required()->check(CLI::IsMember({"maximal", "assouad_kary", "product_flip"}));
  run->add_option("--p", r.p, "First pmf (maximal)")->delimiter(',');
  run->add_option("--q", r.q, "Second pmf (maximal)")->delimiter(',');
  run->add_option("--k", r.k);
  run->add_option("--d", r.d);
  run->add_option("--n", r.n)->required();
  run->add_option("--i", r.i, "Hypercube coordinate");
  run->add_option("--alpha", r.alpha);
  run->add_option("--trials", r.trials);
  run->add_option("--marginal-trials", r.marginal_trials, "0 skips the marginal check");
  run->add_option("--band-sigma", r.band_sigma);
  run->add_option("--marginal-tol", r.marginal_tol);
  run->callback([&] {
    std::unique_ptr<CouplingSampler> s;
    if (r.kind == "maximal") s = maximal_coupling_iid(ProbVector(r.p), ProbVector(r.q), r.n);
    if (r.kind == "assouad_kary") s = assouad_kary_coupling(r.k, r.alpha, r.n, r.i);
    if (r.kind == "product_flip") s = product_flip_coupling(r.d, r.alpha, r.n, r.i);
    Rng rng(g.seed);
    const auto est = empirical_hamming(*s, r.trials, rng, g.threads);
    const double expected = s->expected_hamming();
    bool ok = std::abs(est.estimate - expected) <= r.band_sigma * est.std_error;
    Json doc{{"kind", s->kind()},
             {"n", s->n()},
             {"trials", r.trials},
             {"mean_hamming", est.estimate},
             {"stderr", est.std_error},
             {"expected_hamming", expected},
             {"hamming_bound", s->hamming_bound()},
             {"within_band", ok}};
    if (r.marginal_trials > 0) {
      const double left = marginal_check(*s, Side::Left, r.marginal_trials, rng, g.threads);
      const double right = marginal_check(*s, Side::Right, r.marginal_trials, rng, g.threads);
      doc["marginal_tv"] = {{"left", left}, {"right", right}};
      ok = ok && left <= r.marginal_tol && right <= r.marginal_tol;
    }
    doc["pass"] = ok;
    rc = emit(g, doc, ok);
  });
}

// --- mechanisms -------------------------------------------------------------

void add_mech(CLI::App& app, const Globals& g, int& rc) {
  auto* mech = app.add_subcommand("mech", "Estimators and DP audits")->require_subcommand(1);

  struct Estimate {
    std::string data, estimator = "laplace";
    std::size_t k = 0;
    double eps = 1;
  };
  static Estimate es;
  auto* estimate = mech->add_subcommand("estimate", "Estimate a pmf from a JSON dataset");
  estimate->add_option("--data", es.data, "JSON array of 0-based symbols")->required()->check(CLI::ExistingFile);
  estimate->add_option("--k", es.k)->required();
  estimate->add_option("--estimator", es.estimator)->check(CLI::IsMember({"empirical", "laplace"}));
  estimate->add_option("--eps", es.eps);
  estimate->callback([&] {
    const Dataset data = symbols_from_json(read_json_file(es.data));
    Rng rng(g.seed);
    const auto p = parse_estimator(es.estimator) == EstimatorKind::Empirical
                       ? empirical_estimator(data, es.k)
                       : laplace_estimator(data, es.k, es.eps, rng);
    rc = emit(g, Json{{"estimator", es.estimator}, {"estimate", to_json(Distribution(p))}});
  });

  struct Audit {
    std::string file;
    std::size_t rr_bits = 0;
    double rr_eps = 1, eps = 1, delta = 0;
    std::size_t group = 0;
  };
  static Audit au;
  auto* audit = mech->add_subcommand("audit", "Exact (eps, delta) audit of a tabulated mechanism");
  auto* file_opt = audit->add_option("--file", au.file, "Mechanism JSON")->check(CLI::ExistingFile);
  auto* rr_opt = audit->add_option("--rr-bits", au.rr_bits, "Audit randomized response on this many bits");
  file_opt->excludes(rr_opt);
  audit->add_option("--rr-eps", au.rr_eps, "Epsilon the randomized response is built with");
  audit->add_option("--eps", au.eps);
  audit->add_option("--delta", au.delta, "Claimed delta");
  audit->add_option("--group", au.group, "Also check group privacy up to distance t");
  audit->callback([&] {
    if (au.file.empty() && au.rr_bits == 0) throw Error("mech audit: give --file or --rr-bits");
    const FiniteMechanism m = au.file.empty() ? randomized_response(au.rr_bits, au.rr_eps)
                                              : mechanism_from_json(read_json_file(au.file));
    const double delta_star = check_dp(m, au.eps, {}, g.threads);
    bool ok = delta_star <= au.delta + 1e-12;
    Json doc{{"epsilon", au.eps}, {"delta_star", delta_star}, {"claimed_delta", au.delta}};
    if (au.group > 0) {
      Json groups = Json::array();
      for (std::size_t t = 1; t <= au.group; ++t) {
        const double v = group_dp_check(m, au.eps, au.delta, t, g.threads);
        groups.push_back(Json{{"t", t}, {"excess", v}});
        ok = ok && v <= 0.0;
      }
      doc["group"] = groups;
    }
    doc["pass"] = ok;
    rc = emit(g, doc, ok);
  });

  static std::size_t rr_bits = 1;
  static double rr_eps = 1;
  auto* rr = mech->add_subcommand("rr", "Tabulate randomized response");
  rr->add_option("--bits", rr_bits);
  rr->add_option("--eps", rr_eps);
  rr->callback([&] { rc = emit(g, to_json(randomized_response(rr_bits, rr_eps))); });
}

// --- harness ----------------------------------------------------------------

void add_harness(CLI::App& app, Globals& g, int& rc, bool& seed_given, bool& threads_given) {
  static std::string risk_config;
  auto* risk = app.add_subcommand("risk", "Monte Carlo risk table for a config (no files written)");
  risk->add_option("config", risk_config)->required()->check(CLI::ExistingFile);
  risk->callback([&] {
    auto config = parse_experiment_config(read_text_file(risk_config), risk_config);
    if (seed_given) config.seed = g.seed;
    if (threads_given) config.threads = g.threads;
    const auto report = monte_carlo_risk(config);
    const auto checks = report_checks(report, config);
    bool ok = true;
    for (const auto& c : checks) ok = ok && c.passed;
    Json doc = to_json(report);
    doc["pass"] = ok;
    rc = emit(g, doc, ok);
  });

  static std::string exp_config, golden;
  static double golden_sigma = 3.0;
  auto* exp = app.add_subcommand("experiment", "Run an experiment config, write <out>.json/.csv");
  exp->add_option("config", exp_config)->required()->check(CLI::ExistingFile);
  exp->add_option("--golden", golden, "Compare against a stored report")->check(CLI::ExistingFile);
  exp->add_option("--golden-sigma", golden_sigma);
  exp->callback([&] {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    if (seed_given) seed = g.seed;
    if (threads_given) threads = g.threads;
    auto result = run_experiment(exp_config, g.out, seed, threads);
    bool ok = result.passed;
    Json summary{{"pass", result.passed}, {"checks", result.json["checks"]}};
    if (!golden.empty()) {
      Json gchecks = Json::array();
      for (const auto& c : compare_to_golden(read_json_file(golden), result.report, golden_sigma)) {
        ok = ok && c.passed;
        if (!c.passed) gchecks.push_back(Json{{"name", c.name}, {"detail", c.detail}});
      }
      summary["golden_failures"] = gchecks;
      summary["pass"] = ok;
    }
    // Files are written by run_experiment; stdout gets the summary.
    std::cout << summary.dump(2) << "\n";
    rc = ok ? 0 : 1;
  });

  struct Scaling {
    std::string problem = "kary_tv", regime = "auto";
    ScalingConfig cfg;
    std::optional<double> target;
  };
  static Scaling sc;
  auto* scaling = app.add_subcommand("scaling", "Required-n scaling check");
  scaling->add_option("--problem", sc.problem)->check(CLI::IsMember({"kary_tv", "kary_l2", "assouad_product"}));
  scaling->add_option("--k", sc.cfg.k, "Alphabet size (or d for assouad_product) when not scaled");
  scaling->add_option("--alpha", sc.cfg.alpha);
  scaling->add_option("--eps", sc.cfg.epsilon);
  scaling->add_option("--param", sc.cfg.scale_param)->check(CLI::IsMember({"k", "d", "alpha", "epsilon"}));
  scaling->add_option("--values", sc.cfg.values)->delimiter(',')->required();
  scaling->add_option("--regime", sc.regime)->check(CLI::IsMember({"auto", "privacy", "statistical"}));
  scaling->add_option("--target", sc.target, "Target risk (default alpha)");
  scaling->add_option("--trials", sc.cfg.trials);
  scaling->add_option("--members", sc.cfg.extra_members, "Hypercube members besides the centre");
  scaling->add_option("--n-max", sc.cfg.n_max);
  scaling->callback([&] {
    auto cfg = sc.cfg;
    cfg.problem = parse_scaling_problem(sc.problem);
    cfg.regime = parse_regime(sc.regime);
    cfg.target = sc.target;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto report = scaling_check(cfg);
    rc = emit(g, to_json(report), report.passed);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpminimax: private minimax bounds, constructions and Monte Carlo checks"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Globals g;
  bool seed_given = false, threads_given = false;
  app.add_option("--seed", g.seed, "Seed for every random stream")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->each([&](const std::string&) {
    threads_given = true;
  });
  app.add_option("--out", g.out, "Write output here instead of stdout");
  app.fallthrough();
  int rc = 0;
  add_bounds(app, g, rc);
  add_codes(app, g, rc);
  add_pack(app, g, rc);
  add_couple(app, g, rc);
  add_mech(app, g, rc);
  add_harness(app, g, rc, seed_given, threads_given);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "dpminimax: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
