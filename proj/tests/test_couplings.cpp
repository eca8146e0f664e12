#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dpminimax/couplings.hpp"

using namespace dpminimax;

namespace {

ProbVector random_pmf(std::size_t k, Rng& rng) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += (x = rng.uniform());
  for (auto& x : w) x /= total;
  return ProbVector(w);
}

class GaussianPairSampler final : public CouplingSampler {
 public:
  std::string kind() const override { return "test-gaussian"; }
  std::size_t n() const override { return 1; }
  std::pair<Dataset, Dataset> draw(Rng& rng) const override {
    PointData p{1, {rng.normal()}};
    return {p, p};
  }
  std::optional<Distribution> record_law(Side) const override { return std::nullopt; }
  double expected_hamming() const override { return 0.0; }
  double hamming_bound() const override { return 0.0; }
};

}  // namespace

TEST_CASE("maximal coupling trivial cases") {
  Rng rng(1);
  const ProbVector p({0.2, 0.3, 0.5});
  const auto same = maximal_coupling_iid(p, p, 40);
  const auto h = empirical_hamming(*same, 200, rng);
  CHECK(h.estimate == 0.0);
  CHECK(h.std_error == 0.0);

  const auto apart = maximal_coupling_iid(ProbVector::point_mass(3, 0), ProbVector::point_mass(3, 2), 25);
  const auto ha = empirical_hamming(*apart, 200, rng);
  CHECK(ha.estimate == 25.0);
  CHECK(marginal_check(*apart, Side::Right, 10000, rng) == 0.0);
  CHECK_THROWS_AS(maximal_coupling_iid(p, ProbVector::uniform(4), 3), Error);
}

TEST_CASE("maximal coupling at TV = 0.3, n = 50") {
  const ProbVector p({0.4, 0.3, 0.2, 0.1}), q({0.1, 0.3, 0.2, 0.4});
  REQUIRE(distance(p, q, Metric::TV) == doctest::Approx(0.3));
  const auto c = maximal_coupling_iid(p, q, 50);
  CHECK(c->expected_hamming() == doctest::Approx(15.0));
  Rng rng(7);
  const auto h = empirical_hamming(*c, 10000, rng);
  CHECK(std::abs(h.estimate - 15.0) <= 3.0 * h.std_error);
  // Hamming is Binomial(50, 0.3): stderr of the mean is sqrt(50 * 0.21 / 10^4).
  CHECK(h.std_error == doctest::Approx(std::sqrt(50 * 0.21 / 1e4)).epsilon(0.05));
  CHECK(marginal_check(*c, Side::Left, 20000, rng) < 0.02);
  CHECK(marginal_check(*c, Side::Right, 20000, rng) < 0.02);
}

TEST_CASE("maximal coupling on random pairs matches n * TV") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = 2 + rng.below(9);
    const std::size_t n = 1 + rng.below(100);
    const auto p = random_pmf(k, rng), q = random_pmf(k, rng);
    const auto c = maximal_coupling_iid(p, q, n);
    const auto h = empirical_hamming(*c, 10000, rng);
    CHECK(std::abs(h.estimate - double(n) * distance(p, q, Metric::TV)) <= 4.0 * h.std_error);
  }
}

TEST_CASE("assouad k-ary coupling") {
  Rng rng(11);
  const auto zero = assouad_kary_coupling(10, 0.0, 50, 2);
  CHECK(empirical_hamming(*zero, 100, rng).estimate == 0.0);

  // 20 alpha n / k = 2.0 at n = 20.
  const auto c = assouad_kary_coupling(10, 0.05, 20, 1);
  CHECK(c->expected_hamming() == doctest::Approx(2.0));
  const auto h = empirical_hamming(*c, 10000, rng);
  CHECK(std::abs(h.estimate - 2.0) <= 3.0 * h.std_error);

  // The record law of Y is the closed-form p_{-i} marginal.
  const auto closed = std::get<ProbVector>(*c->record_law(Side::Right));
  CHECK(closed[2] == doctest::Approx(0.05));
  CHECK(closed[3] == doctest::Approx(0.15));
  CHECK(closed[0] == doctest::Approx(0.1));
  CHECK(marginal_check(*c, Side::Right, 20000, rng) < 0.02);
  CHECK(marginal_check(*c, Side::Left, 20000, rng) < 0.02);

  // Only symbol 2i ever changes, and only into 2i+1.
  Rng draw_rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto [x, y] = c->draw(draw_rng);
    const auto& xs = std::get<SymbolData>(x).symbols;
    const auto& ys = std::get<SymbolData>(y).symbols;
    for (std::size_t r = 0; r < xs.size(); ++r)
      if (xs[r] != ys[r]) {
        CHECK(xs[r] == 2);
        CHECK(ys[r] == 3);
      }
  }
  CHECK_THROWS_AS(assouad_kary_coupling(10, 0.05, 20, 5), Error);
}

TEST_CASE("product flip coupling") {
  Rng rng(13);
  const auto zero = product_flip_coupling(20, 0.0, 30, 0);
  CHECK(empirical_hamming(*zero, 100, rng).estimate == 0.0);

  // 40 alpha n / d = 1.0 at n = 100.
  const auto c = product_flip_coupling(20, 0.005, 100, 4);
  CHECK(c->expected_hamming() == doctest::Approx(1.0));
  const auto h = empirical_hamming(*c, 10000, rng);
  CHECK(std::abs(h.estimate - 1.0) <= 3.0 * h.std_error);

  Rng draw_rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto [x, y] = c->draw(draw_rng);
    const auto& xr = std::get<RecordData>(x);
    const auto& yr = std::get<RecordData>(y);
    for (std::size_t v = 0; v < xr.values.size(); ++v)
      if (xr.values[v] != yr.values[v]) {
        CHECK(v % 20 == 4);
        CHECK(xr.values[v] == 1);
        CHECK(yr.values[v] == 0);
      }
  }
  CHECK(marginal_check(*c, Side::Right, 10000, rng) < 0.02);
}

TEST_CASE("coupling estimates are deterministic and thread-count independent") {
  const auto c = assouad_kary_coupling(8, 0.04, 30, 0);
  Rng a(99), b(99);
  const auto one = empirical_hamming(*c, 500, a, 1);
  const auto four = empirical_hamming(*c, 500, b, 4);
  CHECK(one.estimate == four.estimate);
  CHECK(one.std_error == four.std_error);
  Rng e(5), f(5);
  CHECK(marginal_check(*c, Side::Left, 10000, e, 1) == marginal_check(*c, Side::Left, 10000, f, 3));
}

TEST_CASE("argument checks") {
  Rng rng(1);
  GaussianPairSampler g;
  CHECK_THROWS_AS(marginal_check(g, Side::Left, 10000, rng), Error);
  const auto c = maximal_coupling_iid(ProbVector::uniform(2), ProbVector::uniform(2), 3);
  CHECK_THROWS_AS(empirical_hamming(*c, 10, rng), Error);
  CHECK_THROWS_AS(marginal_check(*c, Side::Left, 100, rng), Error);
}
