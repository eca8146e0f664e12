#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dpminimax/io.hpp"

using namespace dpminimax;

TEST_CASE("distributions round-trip") {
  const Distribution kary = ProbVector({0.25, 0.75});
  CHECK(distribution_from_json(to_json(kary)) == kary);
  const Distribution prod = ProductDist({ProbVector({0.1, 0.9}), ProbVector({0.5, 0.5})});
  CHECK(distribution_from_json(to_json(prod)) == prod);
  const Distribution mix = GaussianMixtureSpec({0.5, 0.5}, {{0.1, 0.0}, {0.0, -0.2}}, 1.0);
  CHECK(distribution_from_json(to_json(mix)) == mix);
  CHECK_THROWS_AS(distribution_from_json(Json{{"type", "poisson"}}), Error);
  CHECK_THROWS_AS(distribution_from_json(Json{{"type", "kary"}}), Error);
  CHECK_THROWS_AS(distribution_from_json(Json{{"type", "kary"}, {"probs", {0.3, 0.3}}}), Error);
}

TEST_CASE("codes round-trip in both word encodings") {
  const auto small = gv_qary(3, 4);
  const auto back = code_from_json(to_json(small));
  CHECK(back.words == small.words);
  CHECK(back.claimed_min_distance == small.claimed_min_distance);
  CHECK(to_json(small)["words"][0].is_string());
  const auto big = gv_qary(40, 2, 50);
  CHECK(to_json(big)["words"][0].is_array());
  CHECK(code_from_json(to_json(big)).words == big.words);
  auto broken = to_json(small);
  broken["words"][0] = "0000000";
  CHECK_THROWS_AS(code_from_json(broken), Error);
  broken["words"][0] = "0009";
  CHECK_THROWS_AS(code_from_json(broken), Error);
}

TEST_CASE("packing families round-trip") {
  const auto fam = kary_tv_packing(10, 0.02, 6);
  const auto back = family_from_json(to_json(fam));
  CHECK(back.members == fam.members);
  CHECK(back.separation == fam.separation);
  CHECK(back.kl_cap == fam.kl_cap);
  CHECK(back.tv_cap == fam.tv_cap);
  CHECK(verify_family(back).passed());
  const auto cube = assouad_kary_family(10, 0.05, 20);
  const auto cube_back = hypercube_from_json(to_json(cube));
  CHECK(cube_back.tau() == cube.tau());
  CHECK(cube_back.index_dim() == 5);
}

TEST_CASE("non-finite values travel as null") {
  BoundReport r;
  r.value = std::numeric_limits<double>::infinity();
  r.terms = {{"a", 1.0}};
  CHECK(to_json(r)["value"].is_null());
  CHECK(to_json(r)["terms"]["a"] == 1.0);
}

TEST_CASE("mechanisms and datasets") {
  const auto rr = randomized_response(2, 1.0);
  const auto back = mechanism_from_json(to_json(rr));
  CHECK(back.table == rr.table);
  CHECK(back.datasets == rr.datasets);
  CHECK_THROWS_AS(mechanism_from_json(Json{{"datasets", {{0}}}, {"outputs", {"a"}}, {"table", {{0.5}}}}),
                  Error);
  CHECK(symbols_from_json(Json::parse("[0, 1, 1]")).symbols == std::vector<std::uint32_t>{0, 1, 1});
  CHECK(symbols_from_json(Json::parse(R"({"symbols": [2]})")).symbols == std::vector<std::uint32_t>{2});
  CHECK_THROWS_AS(symbols_from_json(Json::parse("[-1]")), Error);
}

TEST_CASE("parse errors carry source and position") {
  try {
    parse_json("{\n  \"a\": 1,\n  ]", "file.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("file.json: ", 0) == 0);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  CHECK(line_of_key("{\n\"a\": 1,\n\"b\": 2}", "b") == 3);
  CHECK(line_of_key("{}", "b") == 0);
  CHECK(parse_loss("tv") == Loss::TV);
  CHECK_THROWS_AS(parse_loss("L1"), Error);
}
