#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "dpminimax/bounds.hpp"
#include "dpminimax/random.hpp"

using namespace dpminimax;

namespace {

// exp(x) by its Taylor series: a path independent of std::exp.
double series_exp(double x) {
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 60; ++n) {
    term *= x / n;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("le_cam_bound") {
  CHECK(le_cam_bound(0.0, 3.0, {1.0, 0.1}).value == 0.5);
  CHECK(le_cam_bound(0.0, 3.0, {1.0, 0.1}).binding_term == "statistical");
  const auto r = le_cam_bound(1.0, 0.0, {1.0, 0.0});
  CHECK(std::abs(r.value - 0.45) <= 1e-12);
  CHECK(r.binding_term == "privacy");
  CHECK(std::abs(le_cam_bound(1.0, 1.0, {0.1, 0.0}).value - 0.45 * series_exp(-1.0)) <= 1e-12);
  CHECK(le_cam_bound(1.0, 1.0, {0.1, 0.0}).value == doctest::Approx(0.16554).epsilon(1e-4));
  CHECK(le_cam_bound(1.0, 1.0, {1.0, 0.5}).term("privacy") == 0.0);
  CHECK_THROWS_AS(le_cam_bound(1.5, 0.0, {}), Error);
}

TEST_CASE("fano_bound") {
  const auto r = fano_bound(1.0, 1.0, 0.1, 16.0, 1.0);
  CHECK(r.term("statistical") == doctest::Approx(0.5 * (1 - (1 + std::log(2.0)) / std::log(16.0))));
  CHECK(r.term("statistical") == doctest::Approx(0.19465).epsilon(1e-4));
  CHECK(r.term("privacy") == doctest::Approx(0.4));
  CHECK(r.value == doctest::Approx(0.4));

  for (double eps : {0.1, 0.5, 2.0})
    for (double D : {0.3, 1.0, 2.5}) {
      const double M = std::exp(10 * eps * D);
      if (M < 2.0) continue;
      CHECK(std::abs(fano_bound(0.7, 0.0, D, M, eps).term("privacy") - 0.4 * 0.7) <= 1e-12);
    }
  // Large M, no noise, free privacy: tends to alpha / 2.
  CHECK(fano_bound(1.0, 0.0, 0.0, 1e300, 1.0).value == doctest::Approx(0.5).epsilon(0.01));
  CHECK(fano_bound(1.0, 10.0, 0.0, 4.0, 1.0).term("statistical") == 0.0);
  CHECK_THROWS_AS(fano_bound(1.0, 0.0, 0.0, 1.0, 1.0), Error);
}

TEST_CASE("assouad_bound") {
  CHECK(std::abs(assouad_bound(5, 0.2, 0.0, {1.0, 0.0}).value - 0.45 * 5 * 0.2) <= 1e-12);
  const double D = 2.0, eps = 0.5;
  const double delta = 0.09 * std::exp(-10 * eps * D) / D;
  CHECK(assouad_bound(5, 0.2, D, {eps, delta * 1.0001}).value == 0.0);
  // k-ary hypercube instantiation: k_index = k/2, tau = 10a/k, D = 20an/k.
  const std::size_t k = 10, n = 50;
  const double a = 0.1;
  const auto r = assouad_bound(k / 2, 10 * a / k, 20 * a * n / k, {1.0, 0.0});
  CHECK(r.value == doctest::Approx(2.25 * a * std::exp(-200.0 * n * 1.0 * a / k)));
}

TEST_CASE("bounds are monotone in D, eps and delta and stay in range") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double tv = rng.uniform(), D = 3 * rng.uniform(), eps = 2 * rng.uniform();
    const double del = 0.05 * rng.uniform(), tau = rng.uniform();
    const double bump = 0.1 * rng.uniform();
    const auto base = le_cam_bound(tv, D, {eps, del}).value;
    CHECK(base >= 0.0);
    CHECK(base <= 0.5);
    CHECK(le_cam_bound(tv, D + bump, {eps, del}).value <= base + 1e-15);
    CHECK(le_cam_bound(tv, D, {eps + bump, del}).value <= base + 1e-15);
    CHECK(le_cam_bound(tv, D, {eps, del + bump / 10}).value <= base + 1e-15);
    const auto as = assouad_bound(4, tau, D, {eps, del}).value;
    CHECK(as <= 0.45 * 4 * tau + 1e-15);
    CHECK(assouad_bound(4, tau, D + bump, {eps, del}).value <= as + 1e-15);
    CHECK(assouad_bound(4, tau, D, {eps + bump, del}).value <= as + 1e-15);
    const auto fa = fano_bound(1.0, 0.1, D, 20.0, eps).value;
    CHECK(fano_bound(1.0, 0.1, D + bump, 20.0, eps).value <= fa + 1e-15);
    CHECK(fano_bound(1.0, 0.1, D, 20.0, eps + bump).value <= fa + 1e-15);
  }
}

TEST_CASE("Fano and Le Cam privacy terms share the same decay at M = 2") {
  const double eps = 0.7;
  double ratio0 = 0.0;
  for (double D : {0.2, 0.5, 1.0, 1.5}) {
    const double fano = fano_bound(1.0, 0.0, D, 2.0, eps).term("privacy");
    const double lecam = le_cam_bound(1.0, D, {eps, 0.0}).term("privacy");
    if (D > std::log(2.0) / (10 * eps)) {
      const double ratio = fano / lecam;
      if (ratio0 == 0.0) ratio0 = ratio;
      CHECK(ratio == doctest::Approx(ratio0));
    }
  }
  CHECK(ratio0 > 0.0);
}

TEST_CASE("fano_sample_complexity solves the thresholds exactly") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double tau = 0.01 + rng.uniform();
    const double beta = 0.001 + rng.uniform();
    const double gamma = 0.001 + rng.uniform();
    const double M = 2.0 + 1e4 * rng.uniform();
    const double eps = 0.05 + 3 * rng.uniform();
    const auto t = fano_sample_complexity(3 * tau, beta, gamma, M, eps, tau);
    // Linear scan oracle.
    std::uint64_t n_cl = 0;
    while (fano_classical_term(beta, M, tau, n_cl + 1) > tau) ++n_cl;
    std::uint64_t n_pr = 0;
    while (fano_private_term(gamma, M, eps, tau, n_pr + 1) > tau) ++n_pr;
    if (fano_classical_term(beta, M, tau, 0) > tau) {
      CHECK(t.n_classical == n_cl);
    } else {
      CHECK(t.n_classical == 0);
    }
    CHECK(t.n_private == n_pr);
    CHECK(fano_private_term(gamma, M, eps, tau, t.n_private) > tau);
    CHECK(fano_private_term(gamma, M, eps, tau, t.n_private + 1) <= tau);
    const double closed = std::floor((std::log(M) - std::log(5.0 / 6.0)) / (10 * eps * gamma));
    CHECK(std::abs(double(t.n_private) - closed) <= 1.0);
  }
  const auto inf = fano_sample_complexity(3, 1, 1, 10, std::numeric_limits<double>::infinity(), 1);
  CHECK(inf.n_private == 0);
  CHECK(fano_sample_complexity(3, 1, 1, 2, 1, 1).n_classical == 0);
  CHECK_THROWS_AS(fano_sample_complexity(2, 1, 1, 10, 1, 1), Error);
}

TEST_CASE("packing thresholds double with k") {
  const double a = 0.001;
  auto thresholds = [&](double k) {
    const double M = std::pow(2.0, 7.0 * k / 128.0);
    return fano_sample_complexity(3 * a, 10000 * a * a, 24 * a, M, 1.0, a);
  };
  const auto t1 = thresholds(5000), t2 = thresholds(10000);
  CHECK(double(t2.n_classical) / double(t1.n_classical) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(double(t2.n_private) / double(t1.n_private) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("packing_bound and group privacy") {
  CHECK(packing_bound(2, 1) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(packing_bound(std::exp(10.0), 10) == doctest::Approx(1.0));
  // Point-mass Fano at D = d decays like exp(-10 eps d) once M < e^{10 eps d}.
  const double d = 2.0, eps = 0.3, M = 10.0;
  CHECK(fano_bound(1.0, 0.0, d, M, eps).term("privacy") ==
        doctest::Approx(0.4 * M * std::exp(-10 * eps * d)));
  CHECK(packing_bound(M, d) < 10 * eps);

  CHECK(group_privacy_factor({0.5, 0.01}, 0).multiplier == 1.0);
  CHECK(group_privacy_factor({0.5, 0.01}, 0).additive == 0.0);
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    const auto g = group_privacy_factor({eps, 0.03}, 1);
    CHECK(std::abs(g.multiplier - std::exp(eps)) <= 1e-12);
    CHECK(std::abs(g.additive - 0.03) <= 1e-12);
  }
  const auto g3 = group_privacy_factor({0.5, 0.01}, 3);
  CHECK(g3.multiplier == doctest::Approx(std::exp(1.5)));
  CHECK(g3.additive == doctest::Approx(0.03 * std::exp(1.0)));
  // Iterating the one-step guarantee gives delta (1 + e^eps + e^{2 eps}); the
  // closed form t e^{eps (t-1)} delta is the looser of the two.
  CHECK(g3.additive >= 0.01 * (1 + std::exp(0.5) + std::exp(1.0)));
  for (std::uint64_t t1 = 0; t1 < 5; ++t1)
    for (std::uint64_t t2 = 0; t2 < 5; ++t2)
      CHECK(group_privacy_factor({0.3, 0}, t1 + t2).multiplier ==
            doctest::Approx(group_privacy_factor({0.3, 0}, t1).multiplier *
                            group_privacy_factor({0.3, 0}, t2).multiplier));
}

TEST_CASE("sample complexity table") {
  const auto rows = sample_complexity_table(Problem::KaryTV, {100, 1, 0.1, 1}, {1.0, 0.0});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.value == doctest::Approx(11000));
    CHECK(r.unscaled);
    CHECK(r.privacy == "pure");
  }
  const auto l2 = sample_complexity_table(Problem::KaryL2, {100, 1, 0.2, 1}, {1.0, 0.0});
  CHECK(l2[0].expression.find("log(k)") != std::string::npos);
  CHECK(l2[1].value == doctest::Approx(25 + std::log(4.0) / 0.04));
  const auto l2s = sample_complexity_table(Problem::KaryL2, {100, 1, 0.05, 1}, {1.0, 0.0});
  CHECK(l2s[1].value == doctest::Approx(400 + 10 / 0.05));
  const auto approx = sample_complexity_table(Problem::KaryTV, {100, 1, 0.1, 1}, {1.0, 0.5});
  CHECK(approx[1].value == doctest::Approx(10000 + 100 / (0.1 * 1.5)));
  CHECK(approx[1].privacy == "approximate");
  const auto prod = sample_complexity_table(Problem::Product, {2, 10, 0.1, 1}, {1.0, 0.1});
  CHECK(prod[1].value == doctest::Approx(1000 + 10 / (0.1 * 1.1)));
  CHECK_THROWS_AS(sample_complexity_table(Problem::Product, {4, 10, 0.1, 1}, {1.0, 0.1}), Error);
  CHECK_THROWS_AS(parse_problem("bogus"), Error);
  CHECK(parse_problem("gmix") == Problem::GaussianMixture);
}
