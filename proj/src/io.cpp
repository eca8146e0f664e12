#include "dpminimax/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace dpminimax {

namespace {

constexpr const char* kDigits = "0123456789abcdefghijklmnopqrstuvwxyz";

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(std::string(what) + ": missing field \"" + key + "\"");
  return j.at(key);
}

/// Infinity and NaN are not representable in JSON; they travel as null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

Json optional_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(source + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << text;
  if (!out) throw Error(path + ": write failed");
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

Json to_json(const Distribution& dist) {
  if (const auto* p = std::get_if<ProbVector>(&dist)) {
    return Json{{"type", "kary"}, {"probs", std::vector<double>(p->probs().begin(), p->probs().end())}};
  }
  if (const auto* p = std::get_if<ProductDist>(&dist)) {
    Json marginals = Json::array();
    for (const auto& m : p->marginals())
      marginals.push_back(std::vector<double>(m.probs().begin(), m.probs().end()));
    return Json{{"type", "product"}, {"marginals", marginals}};
  }
  const auto& g = std::get<GaussianMixtureSpec>(dist);
  return Json{{"type", "gmix"}, {"weights", g.weights()}, {"means", g.means()}, {"R", g.norm_bound()}};
}

Distribution distribution_from_json(const Json& j) {
  const auto type = field(j, "type", "distribution").get<std::string>();
  if (type == "kary") return ProbVector(field(j, "probs", "kary").get<std::vector<double>>());
  if (type == "product") {
    std::vector<ProbVector> marginals;
    for (const auto& m : field(j, "marginals", "product"))
      marginals.emplace_back(m.get<std::vector<double>>());
    return ProductDist(std::move(marginals));
  }
  if (type == "gmix")
    return GaussianMixtureSpec(field(j, "weights", "gmix").get<std::vector<double>>(),
                               field(j, "means", "gmix").get<std::vector<std::vector<double>>>(),
                               field(j, "R", "gmix").get<double>());
  throw Error("distribution: unknown type \"" + type + "\"");
}

Json to_json(const Code& code) {
  Json words = Json::array();
  for (const auto& w : code.words) {
    if (code.alphabet_size <= 36) {
      std::string s;
      for (auto x : w) s += kDigits[x];
      words.push_back(s);
    } else {
      words.push_back(w);
    }
  }
  Json j{{"h", code.alphabet_size},
         {"len", code.length},
         {"weight", code.weight ? Json(*code.weight) : Json(nullptr)},
         {"min_dist", code.claimed_min_distance},
         {"size", code.size()},
         {"size_bound", optional_number(code.size_bound)},
         {"certified", code.certified},
         {"randomized", code.randomized},
         {"truncated", code.truncated},
         {"words", words}};
  return j;
}

Code code_from_json(const Json& j) {
  Code code;
  code.alphabet_size = field(j, "h", "code").get<std::uint32_t>();
  code.length = field(j, "len", "code").get<std::size_t>();
  if (j.contains("weight") && !j["weight"].is_null()) code.weight = j["weight"].get<std::size_t>();
  code.claimed_min_distance = field(j, "min_dist", "code").get<std::size_t>();
  if (j.contains("size_bound") && !j["size_bound"].is_null())
    code.size_bound = j["size_bound"].get<double>();
  code.certified = j.value("certified", false);
  code.randomized = j.value("randomized", false);
  code.truncated = j.value("truncated", false);
  for (const auto& w : field(j, "words", "code")) {
    Word word;
    if (w.is_string()) {
      for (char c : w.get<std::string>()) {
        const char* hit = std::strchr(kDigits, c);
        if (!hit || *hit == '\0') throw Error("code: bad symbol '" + std::string(1, c) + "'");
        word.push_back(static_cast<std::uint32_t>(hit - kDigits));
      }
    } else {
      word = w.get<Word>();
    }
    if (word.size() != code.length) throw Error("code: word length differs from len");
    for (auto x : word)
      if (x >= code.alphabet_size) throw Error("code: symbol outside the alphabet");
    code.words.push_back(std::move(word));
  }
  return code;
}

Json to_json(const VerificationReport& r) {
  return Json{{"members", r.members},
              {"pairs_checked", r.pairs_checked},
              {"exhaustive", r.exhaustive},
              {"min_separation", number(r.min_separation)},
              {"min_tv", number(r.min_tv)},
              {"max_tv", number(r.max_tv)},
              {"max_kl", number(r.max_kl)},
              {"tv_pairs_checked", r.tv_pairs_checked},
              {"separation_ok", r.separation_ok},
              {"kl_ok", r.kl_ok},
              {"tv_ok", r.tv_ok},
              {"passed", r.passed()},
              {"notes", r.notes}};
}

Json to_json(const HypercubeReport& r) {
  return Json{{"pairs_checked", r.pairs_checked},
              {"exhaustive", r.exhaustive},
              {"min_ratio", number(r.min_ratio)},
              {"max_equality_gap", number(r.max_equality_gap)},
              {"decomposition_ok", r.decomposition_ok},
              {"passed", r.decomposition_ok}};
}

std::string to_string(Loss loss) { return loss == Loss::TV ? "TV" : "L2"; }

Loss parse_loss(const std::string& name) {
  if (name == "TV" || name == "tv") return Loss::TV;
  if (name == "L2" || name == "l2") return Loss::L2;
  throw Error("unknown loss '" + name + "' (expected TV or L2)");
}

Json to_json(const PackingFamily& family) {
  Json codes = Json::array();
  for (const auto& c : family.codes) codes.push_back(to_json(c));
  Json members = Json::array();
  for (const auto& m : family.members) members.push_back(to_json(m));
  Json params = Json::object();
  for (const auto& [k, v] : family.params) params[k] = v;
  return Json{{"type", "packing"},
              {"kind", family.kind},
              {"loss", to_string(family.loss)},
              {"separation", optional_number(family.separation)},
              {"kl_cap", number(family.kl_cap)},
              {"tv_cap", optional_number(family.tv_cap)},
              {"params", params},
              {"notes", family.notes},
              {"codes", codes},
              {"members", members}};
}

PackingFamily family_from_json(const Json& j) {
  PackingFamily f;
  f.kind = field(j, "kind", "family").get<std::string>();
  f.loss = parse_loss(j.value("loss", std::string("TV")));
  if (j.contains("separation") && !j["separation"].is_null())
    f.separation = j["separation"].get<double>();
  if (j.contains("kl_cap")) f.kl_cap = number_or_inf(j["kl_cap"]);
  if (j.contains("tv_cap") && !j["tv_cap"].is_null()) f.tv_cap = j["tv_cap"].get<double>();
  if (j.contains("params"))
    for (const auto& [k, v] : j["params"].items()) f.params[k] = v.get<double>();
  if (j.contains("notes")) f.notes = j["notes"].get<std::vector<std::string>>();
  if (j.contains("codes"))
    for (const auto& c : j["codes"]) f.codes.push_back(code_from_json(c));
  for (const auto& m : field(j, "members", "family")) f.members.push_back(distribution_from_json(m));
  if (f.members.size() < 2) throw Error("family: need at least two members");
  for (const auto& m : f.members)
    if (m.index() != f.members.front().index())
      throw Error("family: members must share a distribution type");
  return f;
}

Json to_json(const HypercubeFamily& family) {
  const bool kary = family.kind() == HypercubeFamily::Kind::Kary;
  return Json{{"type", "hypercube"},
              {"kind", kary ? "assouad-kary" : "assouad-product"},
              {kary ? "k" : "d", family.size_param()},
              {"alpha", family.alpha()},
              {"n", family.n()},
              {"index_dim", family.index_dim()},
              {"tau", family.tau()}};
}

HypercubeFamily hypercube_from_json(const Json& j) {
  const auto kind = field(j, "kind", "hypercube").get<std::string>();
  const double alpha = field(j, "alpha", "hypercube").get<double>();
  const auto n = j.value("n", std::size_t{1});
  if (kind == "assouad-kary")
    return assouad_kary_family(field(j, "k", "hypercube").get<std::size_t>(), alpha, n);
  if (kind == "assouad-product")
    return assouad_product_family(field(j, "d", "hypercube").get<std::size_t>(), alpha, n);
  throw Error("hypercube: unknown kind \"" + kind + "\"");
}

Json to_json(const BoundReport& report) {
  Json terms = Json::object();
  for (const auto& [k, v] : report.terms) terms[k] = number(v);
  return Json{{"value", number(report.value)}, {"terms", terms}, {"binding_term", report.binding_term}};
}

Json to_json(const std::vector<TableRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back(Json{{"problem", r.problem},
                       {"side", r.side},
                       {"privacy", r.privacy},
                       {"expression", r.expression},
                       {"source", r.source},
                       {"value", number(r.value)},
                       {"unscaled", r.unscaled}});
  return out;
}

Json to_json(const FiniteMechanism& mech) {
  return Json{{"datasets", mech.datasets}, {"outputs", mech.outputs}, {"table", mech.table}};
}

FiniteMechanism mechanism_from_json(const Json& j) {
  FiniteMechanism mech;
  mech.datasets = field(j, "datasets", "mechanism").get<std::vector<std::vector<std::int64_t>>>();
  for (const auto& o : field(j, "outputs", "mechanism"))
    mech.outputs.push_back(o.is_string() ? o.get<std::string>() : o.dump());
  mech.table = field(j, "table", "mechanism").get<std::vector<std::vector<double>>>();
  mech.validate();
  return mech;
}

SymbolData symbols_from_json(const Json& j) {
  const Json& arr = j.is_object() ? field(j, "symbols", "dataset") : j;
  if (!arr.is_array()) throw Error("dataset: expected an array of symbols");
  SymbolData data;
  for (const auto& v : arr) {
    const auto x = v.get<std::int64_t>();
    if (x < 0) throw Error("dataset: symbols must be nonnegative");
    data.symbols.push_back(static_cast<std::uint32_t>(x));
  }
  return data;
}

}  // namespace dpminimax
