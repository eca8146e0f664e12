#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "dpminimax/harness.hpp"

using namespace dpminimax;

namespace {

// E[TV(p_emp, p)] by enumerating all count vectors of n draws.
double exact_empirical_tv(const std::vector<double>& p, int n) {
  const int k = int(p.size());
  double total = 0.0;
  std::vector<int> counts(k, 0);
  auto recurse = [&](auto&& self, int i, int left, double log_prob) -> void {
    if (i == k - 1) {
      counts[i] = left;
      const double lp = log_prob + left * std::log(p[i]) - std::lgamma(left + 1.0);
      double tv = 0.0;
      for (int j = 0; j < k; ++j) tv += std::abs(double(counts[j]) / n - p[j]);
      total += std::exp(lp + std::lgamma(n + 1.0)) * tv / 2.0;
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      self(self, i + 1, left - c, log_prob + c * std::log(p[i]) - std::lgamma(c + 1.0));
    }
  };
  recurse(recurse, 0, n, 0.0);
  return total;
}

ExperimentConfig singleton(const std::vector<double>& p, std::size_t n, std::size_t trials) {
  ExperimentConfig c;
  FamilySpec f;
  f.kind = "explicit";
  f.members.emplace_back(p);
  f.k = p.size();
  c.family = {f};
  c.estimator.kind = EstimatorKind::Empirical;
  c.n_grid = {n};
  c.trials = trials;
  c.seed = 11;
  return c;
}

const char* kGoodConfig = R"({
  "schema": 1,
  "family": {"kind": "kary_tv", "k": 10, "alpha": 0.02, "max_members": 8},
  "estimator": {"kind": "laplace", "epsilon": 1.0},
  "loss": "TV",
  "n_grid": [100, 1000],
  "trials": 60,
  "seed": 5
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

std::string error_of(const std::string& text) {
  try {
    parse_experiment_config(text, "cfg.json");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empirical risk matches exact multinomial expectation at n = 8") {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const double exact = exact_empirical_tv(p, 8);
  const auto report = monte_carlo_risk(singleton(p, 8, 20000));
  CHECK(std::abs(report.max_risk[0] - exact) <= 3.0 * report.max_risk_stderr[0]);
}

TEST_CASE("empirical risk at n = 1e4 follows the Gaussian envelope") {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const double n = 10000;
  double envelope = 0.0;
  for (double q : p) envelope += 0.5 * std::sqrt(2.0 * q * (1 - q) / (std::numbers::pi * n));
  const auto report = monte_carlo_risk(singleton(p, 10000, 2000));
  CHECK(std::abs(report.max_risk[0] - envelope) <=
        3.0 * report.max_risk_stderr[0] + 0.02 * envelope);
}

TEST_CASE("max risk dominates every member and is thread-independent") {
  auto config = parse_experiment_config(kGoodConfig, "cfg");
  const auto one = monte_carlo_risk(config);
  for (std::size_t i = 0; i < one.n_grid.size(); ++i)
    for (std::size_t m = 0; m < one.labels.size(); ++m)
      CHECK(one.max_risk[i] >= one.cell(i, m).mean_loss);
  config.threads = 3;
  const auto three = monte_carlo_risk(config);
  CHECK(one.max_risk == three.max_risk);
  config.seed = 6;
  const auto other = monte_carlo_risk(config);
  CHECK(other.max_risk != one.max_risk);
}

TEST_CASE("common random numbers reuse streams across n") {
  auto config = parse_experiment_config(kGoodConfig, "cfg");
  config.common_random_numbers = true;
  config.n_grid = {200, 400, 800, 1600};
  const auto report = monte_carlo_risk(config);
  for (std::size_t i = 1; i < report.n_grid.size(); ++i)
    CHECK(report.max_risk[i] < report.max_risk[i - 1]);
  for (const auto& c : report_checks(report, config)) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("schema errors name the line") {
  CHECK_NOTHROW(parse_experiment_config(kGoodConfig, "cfg.json"));
  const auto empty_grid = error_of(replace(kGoodConfig, "[100, 1000]", "[]"));
  CHECK(empty_grid.find("cfg.json:6:") != std::string::npos);
  CHECK(empty_grid.find("nonempty") != std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "[100, 1000]", "[1000, 100]")).find(":6:") !=
        std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "\"trials\": 60", "\"trials\": 10")).find(":7:") !=
        std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "\"seed\"", "\"sead\"")).find("unknown key") !=
        std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "\"schema\": 1", "\"schema\": 2")).find(":2:") !=
        std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "kary_tv", "nope")).find(":3:") != std::string::npos);
  CHECK(error_of(replace(kGoodConfig, "\"TV\"", "\"L7\"")).find(":5:") != std::string::npos);
  const auto syntax = error_of(replace(kGoodConfig, "\"seed\": 5", "\"seed\": 5,,"));
  CHECK(syntax.find("line 8") != std::string::npos);
}

TEST_CASE("family materialization") {
  FamilySpec cube;
  cube.kind = "assouad_kary";
  cube.k = 10;
  cube.alpha = 0.1;
  FamilySpec pack;
  pack.kind = "kary_tv";
  pack.k = 10;
  pack.alpha = 0.02;
  pack.max_members = 5;
  const auto fam = materialize({pack, cube});
  CHECK(fam.members.size() == 5 + 32);
  CHECK(fam.components.size() == 2);
  CHECK(fam.components[1].first == 5);
  CHECK(fam.labels[5] == "assouad_kary[1]/0");
  FamilySpec huge = cube;
  huge.k = 24;
  CHECK_THROWS_AS(materialize({huge}), Error);
  FamilySpec other = pack;
  other.k = 12;
  CHECK_THROWS_AS(materialize({pack, other}), Error);
}

TEST_CASE("matched bounds against hand computation") {
  FamilySpec f;
  f.kind = "explicit";
  f.members = {ProbVector({0.5, 0.5}), ProbVector({0.6, 0.4})};
  f.k = 2;
  const auto fam = materialize({f});
  const double inf = std::numeric_limits<double>::infinity();
  // tv = 0.1, n = 3: 1 - min(1, 0.3, sqrt(3 KL / 2)) with KL the smaller direction.
  const double kl = std::min(0.5 * std::log(0.5 / 0.6) + 0.5 * std::log(0.5 / 0.4),
                             0.6 * std::log(0.6 / 0.5) + 0.4 * std::log(0.4 / 0.5));
  const double tv_n = std::min(0.3, std::sqrt(3 * kl / 2));
  const auto b = matched_bounds(fam, Loss::TV, PrivacyBudget(inf, 0.0), 3);
  CHECK(b.lecam == doctest::Approx(0.5 * 0.1 * 0.5 * (1 - tv_n)).epsilon(1e-12));
  CHECK(std::isnan(b.fano));
  CHECK(std::isnan(b.assouad));
  const auto l2 = matched_bounds(fam, Loss::L2, PrivacyBudget(inf, 0.0), 3);
  CHECK(l2.lecam == doctest::Approx(0.5 * std::sqrt(0.02) * 0.5 * (1 - tv_n)).epsilon(1e-12));

  FamilySpec cube;
  cube.kind = "assouad_kary";
  cube.k = 10;
  cube.alpha = 0.1;
  const auto hc = materialize({cube});
  const auto ab = matched_bounds(hc, Loss::TV, PrivacyBudget(1.0, 0.0), 5);
  CHECK(ab.assouad == doctest::Approx(assouad_bound(5, 0.1, 1.0, PrivacyBudget(1.0, 0.0)).value));
}

TEST_CASE("Laplace estimator respects the matched lower bounds below k/(alpha eps)") {
  ExperimentConfig c;
  FamilySpec cube;
  cube.kind = "assouad_kary";
  cube.k = 10;
  cube.alpha = 0.1;
  FamilySpec pack;
  pack.kind = "kary_tv";
  pack.k = 10;
  pack.alpha = 0.02;
  pack.max_members = 16;
  c.family = {cube, pack};
  c.estimator.budget = PrivacyBudget(0.05, 0.0);
  c.n_grid = {2, 10, 50};
  c.trials = 100;
  const auto report = monte_carlo_risk(c);
  for (const auto& check : report_checks(report, c)) CHECK_MESSAGE(check.passed, check.detail);
  CHECK(report.bounds[0].assouad > 0.01);
}

TEST_CASE("ceiling check and CSV schema") {
  auto config = parse_experiment_config(kGoodConfig, "cfg");
  config.risk_ceiling = 1e-6;
  const auto report = monte_carlo_risk(config);
  const auto checks = report_checks(report, config);
  CHECK_FALSE(checks.back().passed);
  const auto csv = to_csv(report);
  CHECK(csv.rfind("family_member,n,trials,mean_loss,stderr,bound_lecam,bound_fano,bound_assouad\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 8);
}

TEST_CASE("run_experiment writes JSON and CSV and reproduces itself") {
  const auto dir = std::filesystem::temp_directory_path() / "dpminimax_harness_test";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << kGoodConfig;
  const auto result = run_experiment(cfg.string(), (dir / "out").string());
  CHECK(std::filesystem::exists(dir / "out.json"));
  CHECK(std::filesystem::exists(dir / "out.csv"));
  const auto stored = read_json_file((dir / "out.json").string());
  CHECK(stored["schema"] == 1);
  CHECK(stored["seed"] == 5);
  CHECK(stored["version"].get<std::string>() == version());
  CHECK(stored["pass"] == result.passed);
  for (const auto& c : compare_to_golden(stored, result.report, 3.0)) CHECK(c.passed);

  // Another seed moves the sample path but stays inside the bands.
  const auto reseeded = run_experiment(cfg.string(), "", 77);
  CHECK(reseeded.report.max_risk != result.report.max_risk);
  for (const auto& c : compare_to_golden(stored, reseeded.report, 4.0)) CHECK_MESSAGE(c.passed, c.detail);

  // A shifted report fails the comparison.
  auto shifted = result.report;
  for (auto& cell : shifted.cells) cell.mean_loss += 1.0;
  bool any_failed = false;
  for (const auto& c : compare_to_golden(stored, shifted, 3.0)) any_failed |= !c.passed;
  CHECK(any_failed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scaling: required n doubles with k in the privacy regime") {
  ScalingConfig s;
  s.values = {10, 20, 40};
  s.seed = 3;
  const auto report = scaling_check(s);
  CHECK(report.regime == Regime::Privacy);
  CHECK(report.exponent == 1.0);
  REQUIRE(report.steps.size() == 2);
  for (const auto& step : report.steps) {
    CHECK(step.band_lo == doctest::Approx(1.5));
    CHECK(step.band_hi == doctest::Approx(2.5));
    CHECK(step.passed);
  }
  for (const auto& p : report.points) CHECK(p.risk_at_n <= 0.2);
}

TEST_CASE("scaling: epsilon halves and alpha quadruples in their regimes") {
  ScalingConfig eps;
  eps.scale_param = "epsilon";
  eps.values = {0.1, 0.2, 0.4};
  eps.alpha = 0.4;
  eps.seed = 4;
  const auto er = scaling_check(eps);
  CHECK(er.regime == Regime::Privacy);
  for (const auto& step : er.steps) CHECK_MESSAGE(step.passed, step.observed_ratio);

  ScalingConfig alpha;
  alpha.scale_param = "alpha";
  alpha.values = {0.1, 0.2};
  alpha.epsilon = 20.0;
  alpha.seed = 4;
  const auto ar = scaling_check(alpha);
  CHECK(ar.regime == Regime::Statistical);
  CHECK(ar.steps[0].expected_ratio == doctest::Approx(4.0));
  CHECK_MESSAGE(ar.steps[0].passed, ar.steps[0].observed_ratio);
}

TEST_CASE("scaling errors") {
  ScalingConfig s;
  s.values = {10, 20};
  s.n_max = 20;
  try {
    scaling_check(s);
    FAIL("expected a bracketing error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("evaluated:") != std::string::npos);
  }
  ScalingConfig bad;
  bad.values = {10};
  CHECK_THROWS_AS(scaling_check(bad), Error);
  bad.values = {10, 200};
  CHECK_THROWS_AS(scaling_check(bad), Error);
  bad.values = {0.1, 0.2};
  bad.scale_param = "epsilon";
  bad.regime = Regime::Statistical;
  CHECK_THROWS_AS(scaling_check(bad), Error);
  CHECK_THROWS_AS(parse_scaling_problem("gmix"), Error);
}
