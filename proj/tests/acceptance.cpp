// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Tolerances and runtime limits are fixed here and must not be loosened.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dpminimax/bounds.hpp"
#include "dpminimax/codes.hpp"
#include "dpminimax/couplings.hpp"
#include "dpminimax/harness.hpp"
#include "dpminimax/mechanisms.hpp"
#include "dpminimax/packings.hpp"

using namespace dpminimax;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool run(int id, const char* title, double time_limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(secs < time_limit_s, "runtime limit " + std::to_string(time_limit_s) + "s");
  std::printf("%s [%d] %s (%.2fs):%s\n", out.passed ? "PASS" : "FAIL", id, title, secs,
              out.detail.str().c_str());
  std::fflush(stdout);
  return out.passed;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void criterion_bounds(Outcome& out) {
  const double tol = 1e-12;
  double worst = 0.0;
  for (double eps : {0.1, 0.5, 1.0, 3.0}) {
    const double lc = le_cam_bound(1.0, 0.0, PrivacyBudget(eps, 0.0)).value;
    worst = std::max(worst, std::abs(lc - 0.45));
    for (double D : {0.1, 1.0, 2.5}) {
      const double alpha = 0.3;
      const double M = std::exp(10.0 * eps * D);
      if (M < 2.0) continue;  // Fano needs at least two hypotheses
      const double second = fano_bound(alpha, 0.0, D, M, eps).term("privacy");
      worst = std::max(worst, std::abs(second - 0.4 * alpha));
    }
    for (std::size_t k : {1, 5, 50}) {
      const double tau = 0.07;
      const double a = assouad_bound(k, tau, 0.0, PrivacyBudget(eps, 0.0)).value;
      worst = std::max(worst, std::abs(a - 0.45 * double(k) * tau));
    }
    for (double delta : {0.0, 1e-6, 0.1}) {
      const auto g = group_privacy_factor(PrivacyBudget(eps, delta), 1);
      worst = std::max({worst, std::abs(g.multiplier - std::exp(eps)), std::abs(g.additive - delta)});
    }
  }
  out.detail << " max deviation " << worst;
  out.require(worst <= tol, "exact to 1e-12");
}

void criterion_codes(Outcome& out) {
  const auto cw = gv_constant_weight(16, 8);
  const auto qa = gv_qary(2, 4);
  const auto d_cw = min_distance(cw);
  const auto d_qa = min_distance(qa);
  out.detail << " cw(16,8): " << cw.size() << " words, d_min " << d_cw;
  out.detail << "; qary(2,4): " << qa.size() << " words, d_min " << d_qa;
  out.require(d_cw >= 2 && d_qa >= 2, "min distance >= 2");
  out.require(d_cw >= cw.claimed_min_distance && d_qa >= qa.claimed_min_distance,
              "claimed distance verified");
  for (const Code* c : {&cw, &qa}) {
    if (c->size_bound) {
      out.detail << " (bound " << *c->size_bound << ")";
      out.require(c->meets_size_bound(), "size bound");
    }
  }
}

void criterion_packings(Outcome& out) {
  VerifyOptions opt;
  opt.member_cap = 500;
  const auto tv = kary_tv_packing(40, 0.01, 500);
  const auto rt = verify_family(tv, opt);
  out.detail << " kary_tv: " << rt.members << " members, " << rt.pairs_checked << " pairs, TV in ["
             << rt.min_tv << ", " << rt.max_tv << "], max KL " << rt.max_kl;
  out.require(rt.exhaustive, "exhaustive pairs");
  out.require(rt.min_tv >= 0.03 && rt.max_tv <= 0.24, "TV in [0.03, 0.24]");
  out.require(rt.max_kl <= 1.0, "KL <= 1.0");
  const auto pr = product_packing(40, 4, 0.05, true, 500);
  const auto rp = verify_family(pr, opt);
  out.detail << "; product: " << rp.members << " members, max KL " << rp.max_kl;
  out.require(rp.exhaustive, "exhaustive product pairs");
  out.require(rp.max_kl <= 0.01 + 1e-12, "product KL <= 0.01");
}

void coupling_line(Outcome& out, const CouplingSampler& s, double target, std::size_t trials,
                   std::size_t marginal_trials, std::uint64_t seed, const std::string& name) {
  Rng rng(seed);
  const auto est = empirical_hamming(s, trials, rng);
  const bool ok = std::abs(est.estimate - target) <= 3.0 * est.std_error;
  out.detail << " " << name << ": " << est.estimate << " +- " << est.std_error << " vs " << target;
  out.require(ok, name + " within 3 stderr");
  if (marginal_trials > 0) {
    const double left = marginal_check(s, Side::Left, marginal_trials, rng);
    const double right = marginal_check(s, Side::Right, marginal_trials, rng);
    out.detail << " (marginal TV " << std::max(left, right) << ")";
    out.require(left <= 0.02 && right <= 0.02, name + " marginals <= 0.02");
  }
  out.detail << ";";
}

void criterion_couplings(Outcome& out) {
  const ProbVector p({0.4, 0.3, 0.2, 0.1});
  const ProbVector q({0.1, 0.3, 0.2, 0.4});  // TV = 0.3
  coupling_line(out, *maximal_coupling_iid(p, q, 50), 15.0, 10000, 100000, 1, "maximal n=50");
  // At the listed parameters the exact expectations are 20 alpha n / k = 20
  // and 40 alpha n / d = 10; the listed 2.0 and 1.0 are reached at n = 20 and
  // n = 100, so both configurations are checked.
  coupling_line(out, *assouad_kary_coupling(10, 0.05, 200, 0), 20.0, 10000, 100000, 2,
                "assouad_kary n=200");
  coupling_line(out, *assouad_kary_coupling(10, 0.05, 20, 0), 2.0, 10000, 0, 3, "assouad_kary n=20");
  coupling_line(out, *product_flip_coupling(20, 0.005, 1000, 0), 10.0, 10000, 100000, 4,
                "product_flip n=1000");
  coupling_line(out, *product_flip_coupling(20, 0.005, 100, 0), 1.0, 10000, 0, 5,
                "product_flip n=100");
}

void criterion_projection(Outcome& out) {
  Rng rng(7);
  double worst_gap = -1e300, worst_kkt = 0.0;
  std::vector<std::vector<double>> grid2, grid3;
  for (int g = 0; g <= 10000; ++g) grid2.push_back({g / 10000.0, 1 - g / 10000.0});
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; i + j <= 200; ++j) grid3.push_back({i / 200.0, j / 200.0, (200 - i - j) / 200.0});
  for (int t = 0; t < 20000; ++t) {
    const bool three = t % 2 == 1;  // 10^4 inputs on each simplex
    std::vector<double> v(three ? 3 : 2);
    for (auto& x : v) x = 4 * rng.uniform() - 2;
    const auto w = project_simplex(v);
    const double mine = l2(v, w.probs());
    double best = 1e300;
    for (const auto& c : three ? grid3 : grid2) best = std::min(best, l2(v, c));
    worst_gap = std::max(worst_gap, mine - best);
    worst_kkt = std::max(worst_kkt, kkt_residual(v, w.probs()));
  }
  out.detail << " worst suboptimality vs grid " << worst_gap << ", worst KKT residual " << worst_kkt;
  out.require(worst_gap <= 1e-6, "suboptimality <= 1e-6");
  out.require(worst_kkt <= 1e-9, "KKT <= 1e-9");
}

void criterion_dp_audit(Outcome& out) {
  double worst_delta = 0.0, worst_group = -1e300;
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    for (std::size_t bits : {1, 3}) worst_delta = std::max(worst_delta, check_dp(randomized_response(bits, eps), eps));
    const auto rr5 = randomized_response(5, eps);
    for (std::size_t t = 1; t <= 5; ++t) worst_group = std::max(worst_group, group_dp_check(rr5, eps, 0.0, t));
  }
  out.detail << " max delta* " << worst_delta << ", max group excess " << worst_group;
  out.require(worst_delta <= 1e-12, "delta* <= 1e-12");
  out.require(worst_group <= 0.0, "group check <= 0");
}

ExperimentConfig laplace_experiment(std::vector<FamilySpec> family, std::size_t n) {
  ExperimentConfig c;
  c.family = std::move(family);
  c.estimator.kind = EstimatorKind::Laplace;
  c.estimator.budget = PrivacyBudget(1.0, 0.0);
  c.n_grid = {n};
  c.trials = 200;
  c.seed = 2024;
  return c;
}

FamilySpec spec(const std::string& kind, std::size_t k, double alpha,
                std::optional<std::size_t> cap = std::nullopt) {
  FamilySpec f;
  f.kind = kind;
  f.k = k;
  f.alpha = alpha;
  f.max_members = cap;
  return f;
}

void criterion_upper(Outcome& out) {
  const std::size_t k = 10;
  const double alpha = 0.1, eps = 1.0;
  const auto formula_n = std::size_t(std::llround(10.0 * (k / (alpha * alpha) + k / (alpha * eps))));
  // The formula gives 11000 while the stated sample size is 20000; both are run.
  // The TV packing needs alpha < 1/48, so alpha = 0.1 is covered by the
  // hypercube family at alpha = 0.1 together with the largest valid packing.
  auto config = laplace_experiment({spec("kary_tv", k, 0.02, 64), spec("assouad_kary", k, alpha)}, 0);
  config.n_grid = {formula_n, 20000};
  const auto report = monte_carlo_risk(config);
  out.detail << " " << report.labels.size() << " members;";
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    out.detail << " n=" << config.n_grid[i] << ": max risk " << report.max_risk[i] << " +- "
               << report.max_risk_stderr[i] << " (" << report.labels[report.argmax[i]] << ");";
    out.require(report.max_risk[i] <= alpha, "max risk <= 0.1 at n=" + std::to_string(config.n_grid[i]));
  }
}

void criterion_lower(Outcome& out) {
  const std::size_t k = 10, n = 50;
  const double alpha = 0.1;
  auto config = laplace_experiment({spec("assouad_kary", k, alpha)}, n);
  const auto report = monte_carlo_risk(config);
  const double tau = 10.0 * alpha / double(k);
  const double D = 20.0 * alpha * double(n) / double(k);
  const double bound = assouad_bound(k / 2, tau, D, PrivacyBudget(1.0, 0.0)).value;
  const double floor = bound - 4.0 * report.max_risk_stderr[0];
  out.detail << " risk " << report.max_risk[0] << " +- " << report.max_risk_stderr[0]
             << ", bound " << bound << " (tau " << tau << ", D " << D << ")";
  out.require(report.max_risk[0] >= floor, "risk >= bound - 4 stderr");
  out.require(near(report.bounds[0].assouad, bound, 1e-15), "harness matches bound");
}

void criterion_scaling(Outcome& out) {
  ScalingConfig s;
  s.problem = ScalingProblem::KaryTV;
  s.alpha = 0.2;
  s.epsilon = 0.2;
  s.scale_param = "k";
  s.values = {10, 20, 40};
  s.seed = 9;
  const auto report = scaling_check(s);
  for (const auto& p : report.points) out.detail << " k=" << p.value << ": n=" << p.required_n << ";";
  for (const auto& st : report.steps)
    out.detail << " ratio " << st.observed_ratio << " in [" << st.band_lo << ", " << st.band_hi << "]";
  out.require(report.regime == Regime::Privacy, "privacy-dominated regime");
  for (const auto& st : report.steps) {
    out.require(std::abs(st.band_lo - 1.5) < 1e-12 && std::abs(st.band_hi - 2.5) < 1e-12,
                "band [1.5, 2.5]");
    out.require(st.passed, "ratio within band");
  }
}

}  // namespace

int main() {
  bool all = true;
  all &= run(1, "bound evaluators", 1.0, criterion_bounds);
  all &= run(2, "Gilbert-Varshamov codes", 10.0, criterion_codes);
  all &= run(3, "packings", 60.0, criterion_packings);
  all &= run(4, "couplings", 120.0, criterion_couplings);
  all &= run(5, "simplex projection", 600.0, criterion_projection);
  all &= run(6, "DP audit", 5.0, criterion_dp_audit);
  all &= run(7, "upper bound reproduction", 300.0, criterion_upper);
  all &= run(8, "lower bound consistency", 120.0, criterion_lower);
  all &= run(9, "required-n scaling", 900.0, criterion_scaling);
  std::printf(
      "NOTE [10] claims quantified over all DP estimators are not reproducible at desk scale; "
      "criteria 1-9 stand in for them.\n");
  std::printf("%s\n", all ? "ACCEPTANCE: PASS" : "ACCEPTANCE: FAIL");
  return all ? 0 : 1;
}
