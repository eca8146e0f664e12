#include "dpminimax/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dpminimax/bounds.hpp"
#include "dpminimax/parallel.hpp"
#include "dpminimax/random.hpp"

#ifndef DPMINIMAX_VERSION
#define DPMINIMAX_VERSION "unknown"
#endif

namespace dpminimax {

namespace {

constexpr std::size_t kMaxMembers = 2000;
constexpr std::size_t kLeCamMembers = 300;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Schema reader that reports the line of the offending key.
class ConfigReader {
 public:
  ConfigReader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const auto line = key.empty() ? 0 : line_of_key(text_, key);
    throw Error(source_ + ":" + (line ? std::to_string(line) : std::string("?")) + ": " + message);
  }

  template <typename T>
  T get(const Json& j, const std::string& key, const std::string& what) const {
    try {
      return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(key, "\"" + key + "\" " + what);
    }
  }

  void only_keys(const Json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) const {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
      if (!keys.count(key)) fail(key, "unknown key \"" + key + "\" in " + where);
  }

 private:
  const std::string& text_;
  std::string source_;
};

FamilySpec parse_family_spec(const Json& j, const ConfigReader& reader) {
  if (!j.is_object()) reader.fail("family", "each family component must be an object");
  reader.only_keys(j, {"kind", "k", "alpha", "max_members", "members"}, "family");
  if (!j.contains("kind")) reader.fail("family", "family component needs \"kind\"");
  FamilySpec spec;
  spec.kind = reader.get<std::string>(j, "kind", "must be a string");
  static const std::set<std::string> kinds{"kary_tv", "kary_l2", "assouad_kary", "explicit"};
  if (!kinds.count(spec.kind))
    reader.fail("kind", "unknown family kind \"" + spec.kind +
                            "\" (expected kary_tv, kary_l2, assouad_kary or explicit)");
  if (spec.kind == "explicit") {
    if (!j.contains("members")) reader.fail("kind", "explicit family needs \"members\"");
    const Json& members = j.at("members");
    if (!members.is_array() || members.empty())
      reader.fail("members", "\"members\" must be a nonempty array");
    for (const auto& m : members) {
      try {
        if (m.is_array()) {
          spec.members.emplace_back(m.get<std::vector<double>>());
        } else {
          auto dist = distribution_from_json(m);
          auto* p = std::get_if<ProbVector>(&dist);
          if (!p) reader.fail("members", "explicit members must be k-ary distributions");
          spec.members.push_back(*p);
        }
      } catch (const nlohmann::json::exception& e) {
        reader.fail("members", std::string("bad member: ") + e.what());
      } catch (const Error& e) {
        reader.fail("members", std::string("bad member: ") + e.what());
      }
    }
    spec.k = spec.members.front().k();
  } else {
    if (!j.contains("k")) reader.fail("kind", "family \"" + spec.kind + "\" needs \"k\"");
    if (!j.contains("alpha")) reader.fail("kind", "family \"" + spec.kind + "\" needs \"alpha\"");
    spec.k = reader.get<std::size_t>(j, "k", "must be a positive integer");
    spec.alpha = reader.get<double>(j, "alpha", "must be a number");
  }
  if (j.contains("max_members"))
    spec.max_members = reader.get<std::size_t>(j, "max_members", "must be a positive integer");
  return spec;
}

std::vector<std::vector<int>> sample_signs(std::size_t dim, std::size_t count, Rng& rng) {
  std::vector<std::vector<int>> out(count, std::vector<int>(dim));
  for (auto& signs : out)
    for (auto& s : signs) s = rng.bernoulli(0.5) ? 1 : -1;
  return out;
}

// Symbols for one trial; `data` produces records in order, so a prefix of a
// longer stream is a valid smaller dataset.
ProbVector estimate_kary(const ProbVector& truth, const EstimatorConfig& est, std::size_t n,
                         Rng& data, Rng& noise) {
  const auto sample = sample_dataset(truth, n, data);
  if (est.kind == EstimatorKind::Empirical) return empirical_estimator(sample, est.k);
  std::vector<double> unit(est.k);
  for (auto& x : unit) x = noise.laplace(1.0);
  return laplace_estimator_with_noise(sample.symbols, est.k, est.budget.epsilon, unit);
}

PrivacyBudget effective_budget(const EstimatorConfig& est) {
  if (est.kind == EstimatorKind::Empirical)
    return PrivacyBudget(std::numeric_limits<double>::infinity(), 0.0);
  return est.budget;
}

McEstimate cell_risk(const std::vector<double>& losses) { return mean_and_stderr(losses); }

}  // namespace

std::string version() { return DPMINIMAX_VERSION; }

void ExperimentConfig::validate() const {
  if (family.empty()) throw Error("experiment: family is empty");
  if (n_grid.empty()) throw Error("experiment: n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw Error("experiment: n_grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw Error("experiment: n_grid must be increasing");
  }
  if (trials < 50) throw Error("experiment: trials must be at least 50");
  if (!(band_sigma > 0.0) || !(hard_sigma > 0.0))
    throw Error("experiment: sigma bands must be positive");
  if (estimator.kind == EstimatorKind::Laplace && !(estimator.budget.epsilon > 0.0))
    throw Error("experiment: the Laplace estimator requires epsilon > 0");
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  const Json j = parse_json(text, source);
  ConfigReader reader(text, source);
  if (!j.is_object()) reader.fail("", "config must be a JSON object");
  reader.only_keys(j,
                   {"schema", "family", "estimator", "loss", "n_grid", "trials", "seed", "output",
                    "threads", "common_random_numbers", "band_sigma", "hard_sigma",
                    "risk_ceiling", "description"},
                   "config");
  if (!j.contains("schema")) reader.fail("", "missing \"schema\" (expected 1)");
  if (reader.get<int>(j, "schema", "must be an integer") != 1)
    reader.fail("schema", "unsupported schema version (expected 1)");

  ExperimentConfig config;
  if (!j.contains("family")) reader.fail("", "missing \"family\"");
  const Json& fam = j.at("family");
  if (fam.is_array()) {
    if (fam.empty()) reader.fail("family", "\"family\" must not be empty");
    for (const auto& c : fam) config.family.push_back(parse_family_spec(c, reader));
  } else {
    config.family.push_back(parse_family_spec(fam, reader));
  }
  for (const auto& c : config.family)
    if (c.k != config.family.front().k) reader.fail("family", "family components disagree on k");

  if (!j.contains("estimator")) reader.fail("", "missing \"estimator\"");
  const Json& est = j.at("estimator");
  if (!est.is_object()) reader.fail("estimator", "\"estimator\" must be an object");
  reader.only_keys(est, {"kind", "epsilon", "delta"}, "estimator");
  try {
    config.estimator.kind = parse_estimator(est.value("kind", std::string("laplace")));
  } catch (const Error& e) {
    reader.fail("estimator", e.what());
  }
  const double eps = est.contains("epsilon") ? reader.get<double>(est, "epsilon", "must be a number")
                                             : 1.0;
  const double delta = est.contains("delta") ? reader.get<double>(est, "delta", "must be a number")
                                             : 0.0;
  try {
    config.estimator.budget = PrivacyBudget(eps, delta);
  } catch (const Error& e) {
    reader.fail("epsilon", e.what());
  }
  config.estimator.k = config.family.front().k;

  if (j.contains("loss")) {
    try {
      config.loss = parse_loss(reader.get<std::string>(j, "loss", "must be a string"));
    } catch (const Error& e) {
      reader.fail("loss", e.what());
    }
  }
  if (!j.contains("n_grid")) reader.fail("", "missing \"n_grid\"");
  config.n_grid = reader.get<std::vector<std::size_t>>(j, "n_grid", "must be a list of positive integers");
  if (config.n_grid.empty()) reader.fail("n_grid", "\"n_grid\" must be nonempty");
  for (std::size_t i = 1; i < config.n_grid.size(); ++i)
    if (config.n_grid[i] <= config.n_grid[i - 1])
      reader.fail("n_grid", "\"n_grid\" must be strictly increasing");
  if (config.n_grid.front() < 1) reader.fail("n_grid", "\"n_grid\" entries must be positive");

  if (j.contains("trials")) config.trials = reader.get<std::size_t>(j, "trials", "must be an integer");
  if (config.trials < 50) reader.fail("trials", "\"trials\" must be at least 50");
  if (j.contains("seed")) config.seed = reader.get<std::uint64_t>(j, "seed", "must be a nonnegative integer");
  if (j.contains("output")) config.output_path = reader.get<std::string>(j, "output", "must be a string");
  if (j.contains("threads")) config.threads = reader.get<std::size_t>(j, "threads", "must be an integer");
  if (j.contains("common_random_numbers"))
    config.common_random_numbers = reader.get<bool>(j, "common_random_numbers", "must be a boolean");
  if (j.contains("band_sigma")) config.band_sigma = reader.get<double>(j, "band_sigma", "must be a number");
  if (j.contains("hard_sigma")) config.hard_sigma = reader.get<double>(j, "hard_sigma", "must be a number");
  if (j.contains("risk_ceiling"))
    config.risk_ceiling = reader.get<double>(j, "risk_ceiling", "must be a number");
  try {
    config.validate();
  } catch (const Error& e) {
    reader.fail("", e.what());
  }
  return config;
}

Json to_json(const ExperimentConfig& config) {
  Json family = Json::array();
  for (const auto& c : config.family) {
    Json f{{"kind", c.kind}};
    if (c.kind == "explicit") {
      Json members = Json::array();
      for (const auto& m : c.members) members.push_back(std::vector<double>(m.probs().begin(), m.probs().end()));
      f["members"] = members;
    } else {
      f["k"] = c.k;
      f["alpha"] = c.alpha;
    }
    if (c.max_members) f["max_members"] = *c.max_members;
    family.push_back(f);
  }
  Json j{{"schema", 1},
         {"family", family},
         {"estimator",
          {{"kind", to_string(config.estimator.kind)},
           {"epsilon", json_number(config.estimator.budget.epsilon)},
           {"delta", config.estimator.budget.delta}}},
         {"loss", to_string(config.loss)},
         {"n_grid", config.n_grid},
         {"trials", config.trials},
         {"seed", config.seed},
         {"threads", config.threads},
         {"common_random_numbers", config.common_random_numbers},
         {"band_sigma", config.band_sigma},
         {"hard_sigma", config.hard_sigma}};
  if (!config.output_path.empty()) j["output"] = config.output_path;
  if (config.risk_ceiling) j["risk_ceiling"] = *config.risk_ceiling;
  return j;
}

MaterializedFamily materialize(const std::vector<FamilySpec>& family) {
  if (family.empty()) throw Error("family: no components");
  MaterializedFamily out;
  out.k = family.front().k;
  for (std::size_t ci = 0; ci < family.size(); ++ci) {
    const auto& spec = family[ci];
    if (spec.k != out.k) throw Error("family: components disagree on k");
    FamilyComponent comp;
    comp.kind = spec.kind;
    comp.first = out.members.size();
    std::vector<ProbVector> members;
    if (spec.kind == "kary_tv" || spec.kind == "kary_l2") {
      auto packing = spec.kind == "kary_tv" ? kary_tv_packing(spec.k, spec.alpha, spec.max_members)
                                            : kary_l2_packing(spec.k, spec.alpha, spec.max_members);
      for (const auto& m : packing.members) members.push_back(std::get<ProbVector>(m));
      comp.packing = std::move(packing);
    } else if (spec.kind == "assouad_kary") {
      auto cube = assouad_kary_family(spec.k, spec.alpha, 1);
      if (cube.index_dim() >= 63 || (std::size_t{1} << cube.index_dim()) > kMaxMembers)
        if (!spec.max_members)
          throw Error("family: assouad_kary with k = " + std::to_string(spec.k) +
                      " has more than 2000 members; set max_members");
      const std::size_t cap = spec.max_members.value_or(kMaxMembers);
      const std::size_t total =
          cube.index_dim() >= 63 ? std::numeric_limits<std::size_t>::max()
                                 : (std::size_t{1} << cube.index_dim());
      if (total <= kMaxMembers) {
        for (const auto& s : cube.sign_vectors(kMaxMembers)) {
          if (members.size() >= cap) break;
          members.push_back(cube.kary_member(s));
        }
      } else {
        Rng rng(0);
        for (const auto& s : sample_signs(cube.index_dim(), cap, rng)) members.push_back(cube.kary_member(s));
      }
      comp.hypercube = cube;
    } else if (spec.kind == "explicit") {
      members = spec.members;
      if (spec.max_members && members.size() > *spec.max_members) members.erase(members.begin() + std::ptrdiff_t(*spec.max_members), members.end());
    } else {
      throw Error("family: unknown kind \"" + spec.kind + "\"");
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (members[m].k() != out.k) throw Error("family: member alphabet differs from k");
      out.labels.push_back(spec.kind + "[" + std::to_string(ci) + "]/" + std::to_string(m));
      out.members.push_back(std::move(members[m]));
    }
    comp.count = out.members.size() - comp.first;
    out.components.push_back(std::move(comp));
    if (out.members.size() > kMaxMembers)
      throw Error("family: " + std::to_string(out.members.size()) +
                  " members exceed the limit of 2000");
  }
  return out;
}

double estimation_loss(const ProbVector& estimate, const ProbVector& truth, Loss loss) {
  return distance(estimate, truth, loss == Loss::TV ? Metric::TV : Metric::L2);
}

MatchedBounds matched_bounds(const MaterializedFamily& family, Loss loss,
                             const PrivacyBudget& budget, std::size_t n) {
  MatchedBounds out{kNaN, kNaN, kNaN};
  const double nd = double(n);

  // Le Cam over pairs: the loss separation halves into estimation risk;
  // TV(p^n, q^n) <= min(1, n TV, sqrt(n KL / 2)); maximal coupling gives D = n TV.
  const std::size_t m = std::min(family.members.size(), kLeCamMembers);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const auto& p = family.members[a];
      const auto& q = family.members[b];
      const double tv = distance(p, q, Metric::TV);
      if (tv <= 0.0) continue;
      const double kl = std::min(distance(p, q, Metric::KL), distance(q, p, Metric::KL));
      const double tv_n = std::min({1.0, nd * tv, std::sqrt(nd * kl / 2.0)});
      const double sep = estimation_loss(p, q, loss);
      const double value = 0.5 * sep * le_cam_bound(tv_n, nd * tv, budget).value;
      out.lecam = std::isnan(out.lecam) ? value : std::max(out.lecam, value);
    }

  for (const auto& comp : family.components) {
    if (comp.packing && comp.packing->loss == loss && comp.packing->separation &&
        comp.packing->tv_cap && comp.count >= 2 && budget.delta == 0.0) {
      const auto& pk = *comp.packing;
      const double value = fano_bound(*pk.separation, nd * pk.kl_cap, nd * *pk.tv_cap,
                                      double(comp.count), budget.epsilon)
                               .value;
      out.fano = std::isnan(out.fano) ? value : std::max(out.fano, value);
    }
    if (comp.hypercube && loss == Loss::TV) {
      const auto& cube = *comp.hypercube;
      if (cube.index_dim() < 63 && comp.count == (std::size_t{1} << cube.index_dim())) {
        const double D = 20.0 * cube.alpha() * nd / double(cube.size_param());
        const double value = assouad_bound(cube.index_dim(), cube.tau(), D, budget).value;
        out.assouad = std::isnan(out.assouad) ? value : std::max(out.assouad, value);
      }
    }
  }
  return out;
}

RiskReport monte_carlo_risk(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto family = materialize(config.family);
  EstimatorConfig est = config.estimator;
  est.k = family.k;
  est.validate();

  RiskReport report;
  report.labels = family.labels;
  report.n_grid = config.n_grid;
  report.threads = resolve_threads(config.threads);
  const std::size_t members = family.members.size();
  const std::size_t trials = config.trials;
  std::vector<double> losses(members * trials);

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::size_t n = config.n_grid[ni];
    parallel_for(members * trials, config.threads, [&](std::size_t idx) {
      const std::size_t m = idx / trials;
      const std::size_t t = idx % trials;
      ProbVector estimate = ProbVector::uniform(family.k);
      if (config.common_random_numbers) {
        Rng data = Rng::derive(config.seed, {m, t, 0});
        Rng noise = Rng::derive(config.seed, {m, t, 1});
        estimate = estimate_kary(family.members[m], est, n, data, noise);
      } else {
        Rng rng = Rng::derive(config.seed, {m, n, t});
        estimate = estimate_kary(family.members[m], est, n, rng, rng);
      }
      losses[idx] = estimation_loss(estimate, family.members[m], config.loss);
    });

    double best = -1.0;
    std::size_t best_m = 0;
    for (std::size_t m = 0; m < members; ++m) {
      const std::vector<double> slice(losses.begin() + std::ptrdiff_t(m * trials),
                                      losses.begin() + std::ptrdiff_t((m + 1) * trials));
      const auto risk = cell_risk(slice);
      report.cells.push_back({m, n, trials, risk.estimate, risk.std_error});
      if (risk.estimate > best) {
        best = risk.estimate;
        best_m = m;
      }
    }
    report.max_risk.push_back(best);
    report.argmax.push_back(best_m);
    report.max_risk_stderr.push_back(report.cell(ni, best_m).std_error);
    report.bounds.push_back(matched_bounds(family, config.loss, effective_budget(est), n));
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<Check> report_checks(const RiskReport& report, const ExperimentConfig& config) {
  std::vector<Check> checks;
  for (std::size_t i = 0; i < report.n_grid.size(); ++i) {
    const std::string at = "n=" + std::to_string(report.n_grid[i]);
    const double risk = report.max_risk[i];
    const double se = report.max_risk_stderr[i];
    const std::pair<const char*, double> bounds[] = {{"lecam", report.bounds[i].lecam},
                                                     {"fano", report.bounds[i].fano},
                                                     {"assouad", report.bounds[i].assouad}};
    for (const auto& [name, value] : bounds) {
      if (std::isnan(value)) continue;
      const double floor = value - config.hard_sigma * se;
      checks.push_back({std::string("risk >= ") + name + " bound at " + at, risk >= floor,
                        "risk " + fmt(risk) + " vs bound " + fmt(value) + " - " +
                            fmt(config.hard_sigma) + " se (" + fmt(floor) + ")"});
    }
    if (i > 0) {
      const double prev_se = report.max_risk_stderr[i - 1];
      const double slack = config.band_sigma * std::hypot(se, prev_se);
      checks.push_back({"risk nonincreasing to " + at, risk <= report.max_risk[i - 1] + slack,
                        fmt(report.max_risk[i - 1]) + " -> " + fmt(risk) + " (slack " +
                            fmt(slack) + ")"});
    }
  }
  if (config.risk_ceiling) {
    const double risk = report.max_risk.back();
    checks.push_back({"risk <= ceiling at n=" + std::to_string(report.n_grid.back()),
                      risk <= *config.risk_ceiling,
                      "risk " + fmt(risk) + " vs ceiling " + fmt(*config.risk_ceiling)});
  }
  return checks;
}

Json to_json(const RiskReport& report) {
  Json cells = Json::array();
  for (const auto& c : report.cells)
    cells.push_back(Json{{"family_member", report.labels[c.member]},
                         {"n", c.n},
                         {"trials", c.trials},
                         {"mean_loss", c.mean_loss},
                         {"stderr", c.std_error}});
  Json risk = Json::array();
  for (std::size_t i = 0; i < report.n_grid.size(); ++i)
    risk.push_back(Json{{"n", report.n_grid[i]},
                        {"max_risk", report.max_risk[i]},
                        {"stderr", report.max_risk_stderr[i]},
                        {"argmax", report.labels[report.argmax[i]]},
                        {"bound_lecam", json_number(report.bounds[i].lecam)},
                        {"bound_fano", json_number(report.bounds[i].fano)},
                        {"bound_assouad", json_number(report.bounds[i].assouad)}});
  return Json{{"members", report.labels.size()},
              {"cells", cells},
              {"risk", risk},
              {"wall_time_s", report.wall_time_s},
              {"threads", report.threads}};
}

std::string to_csv(const RiskReport& report) {
  std::ostringstream out;
  out << "family_member,n,trials,mean_loss,stderr,bound_lecam,bound_fano,bound_assouad\n";
  for (std::size_t i = 0; i < report.n_grid.size(); ++i)
    for (std::size_t m = 0; m < report.labels.size(); ++m) {
      const auto& c = report.cell(i, m);
      const auto& b = report.bounds[i];
      out << report.labels[m] << ',' << c.n << ',' << c.trials << ',' << csv_number(c.mean_loss)
          << ',' << csv_number(c.std_error) << ',' << csv_number(b.lecam) << ','
          << csv_number(b.fano) << ',' << csv_number(b.assouad) << '\n';
    }
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Json& config_json) {
  ExperimentResult result;
  result.report = monte_carlo_risk(config);
  result.checks = report_checks(result.report, config);
  result.passed = std::all_of(result.checks.begin(), result.checks.end(),
                              [](const Check& c) { return c.passed; });
  Json checks = Json::array();
  for (const auto& c : result.checks)
    checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  result.json = Json{{"schema", 1},
                     {"config", config_json},
                     {"seed", config.seed},
                     {"version", version()},
                     {"wall_time_s", result.report.wall_time_s},
                     {"threads", result.report.threads},
                     {"report", to_json(result.report)},
                     {"checks", checks},
                     {"pass", result.passed}};

  if (!config.output_path.empty()) {
    std::string prefix = config.output_path;
    if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json")
      prefix.resize(prefix.size() - 5);
    const auto parent = std::filesystem::path(prefix).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_text_file(prefix + ".json", result.json.dump(2) + "\n");
    write_text_file(prefix + ".csv", to_csv(result.report));
  }
  return result;
}

ExperimentResult run_experiment(const std::string& config_path, const std::string& output_override,
                                std::optional<std::uint64_t> seed_override,
                                std::optional<std::size_t> threads_override) {
  auto config = parse_experiment_config(read_text_file(config_path), config_path);
  if (!output_override.empty()) config.output_path = output_override;
  if (seed_override) config.seed = *seed_override;
  if (threads_override) config.threads = *threads_override;
  return run_experiment(config, to_json(config));
}

std::vector<Check> compare_to_golden(const Json& golden, const RiskReport& report, double sigma) {
  std::vector<Check> checks;
  const Json& rep = golden.contains("report") ? golden.at("report") : golden;
  std::map<std::pair<std::string, std::size_t>, std::pair<double, double>> expected;
  for (const auto& c : rep.at("cells"))
    expected[{c.at("family_member").get<std::string>(), c.at("n").get<std::size_t>()}] = {
        c.at("mean_loss").get<double>(), c.at("stderr").get<double>()};
  if (expected.size() != report.cells.size())
    checks.push_back({"golden cell count", false,
                      std::to_string(expected.size()) + " golden vs " +
                          std::to_string(report.cells.size()) + " fresh"});
  for (const auto& c : report.cells) {
    const auto& label = report.labels[c.member];
    const auto it = expected.find({label, c.n});
    if (it == expected.end()) {
      checks.push_back({"golden " + label + " n=" + std::to_string(c.n), false, "missing"});
      continue;
    }
    const auto [mean, se] = it->second;
    const double band = sigma * std::hypot(se, c.std_error);
    checks.push_back({"golden " + label + " n=" + std::to_string(c.n),
                      std::abs(c.mean_loss - mean) <= band,
                      fmt(c.mean_loss) + " vs " + fmt(mean) + " (band " + fmt(band) + ")"});
  }
  return checks;
}

ScalingProblem parse_scaling_problem(const std::string& name) {
  if (name == "kary_tv" || name == "kary-tv") return ScalingProblem::KaryTV;
  if (name == "kary_l2" || name == "kary-l2") return ScalingProblem::KaryL2;
  if (name == "assouad_product" || name == "assouad-product") return ScalingProblem::AssouadProduct;
  throw Error("unknown scaling problem '" + name +
              "' (expected kary_tv, kary_l2 or assouad_product)");
}

std::string to_string(ScalingProblem problem) {
  switch (problem) {
    case ScalingProblem::KaryTV: return "kary_tv";
    case ScalingProblem::KaryL2: return "kary_l2";
    case ScalingProblem::AssouadProduct: return "assouad_product";
  }
  return "?";
}

void ScalingConfig::validate() const {
  static const std::set<std::string> params{"k", "d", "alpha", "epsilon"};
  if (!params.count(scale_param))
    throw Error("scaling: scale parameter must be k, d, alpha or epsilon");
  if (values.size() < 2) throw Error("scaling: need at least two values to compare");
  if (trials < 50) throw Error("scaling: trials must be at least 50");
  if (!(rel_tolerance > 0.0)) throw Error("scaling: rel_tolerance must be positive");
  for (double v : values)
    if (!(v > 0.0)) throw Error("scaling: values must be positive");
  const bool size_param = scale_param == "k" || scale_param == "d";
  const std::size_t limit = problem == ScalingProblem::AssouadProduct ? 20 : 100;
  auto check_size = [&](double s) {
    if (s != std::floor(s) || s < 2 || s > double(limit))
      throw Error("scaling: size parameter must be an integer in [2, " + std::to_string(limit) +
                  "], got " + fmt(s));
  };
  if (size_param)
    for (double v : values) check_size(v);
  else
    check_size(double(k));
}

namespace {

struct ScalingPointSetup {
  std::size_t size = 0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double target = 0.0;
};

// Risk curve of one scaling point with common random numbers: every n sees
// the same (member, trial) streams.
class ScalingEvaluator {
 public:
  ScalingEvaluator(const ScalingConfig& config, const ScalingPointSetup& setup)
      : config_(config), setup_(setup) {
    Rng signs_rng = Rng::derive(config.seed, {0x5ca1e, setup.size});
    if (config.problem == ScalingProblem::AssouadProduct) {
      const auto cube = assouad_product_family(setup.size, 0.009, 1);
      std::vector<ProbVector> half(setup.size, ProbVector({0.5, 0.5}));
      products_.emplace_back(std::move(half));
      for (const auto& s : sample_signs(cube.index_dim(), config.extra_members, signs_rng))
        products_.push_back(cube.product_member(s));
    } else {
      if (setup.size % 2 != 0) throw Error("scaling: k must be even");
      const auto cube = assouad_kary_family(setup.size, 0.05, 1);
      kary_.push_back(ProbVector::uniform(setup.size));
      for (const auto& s : sample_signs(cube.index_dim(), config.extra_members, signs_rng))
        kary_.push_back(cube.kary_member(s));
    }
  }

  double risk(std::size_t n) {
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    const std::size_t members = kary_.empty() ? products_.size() : kary_.size();
    const std::size_t trials = config_.trials;
    std::vector<double> losses(members * trials);
    parallel_for(members * trials, config_.threads, [&](std::size_t idx) {
      const std::size_t m = idx / trials;
      const std::size_t t = idx % trials;
      Rng data = Rng::derive(config_.seed, {m, t, 0});
      Rng noise = Rng::derive(config_.seed, {m, t, 1});
      losses[idx] = kary_.empty() ? product_loss(m, n, data, noise) : kary_loss(m, n, data, noise);
    });
    double best = 0.0;
    for (std::size_t m = 0; m < members; ++m) {
      const std::vector<double> slice(losses.begin() + std::ptrdiff_t(m * trials),
                                      losses.begin() + std::ptrdiff_t((m + 1) * trials));
      best = std::max(best, mean_and_stderr(slice).estimate);
    }
    memo_[n] = best;
    evaluations_.emplace_back(n, best);
    return best;
  }

  const std::vector<std::pair<std::size_t, double>>& evaluations() const { return evaluations_; }

 private:
  double kary_loss(std::size_t m, std::size_t n, Rng& data, Rng& noise) const {
    EstimatorConfig est;
    est.kind = EstimatorKind::Laplace;
    est.k = setup_.size;
    est.budget = PrivacyBudget(setup_.epsilon, 0.0);
    const auto estimate = estimate_kary(kary_[m], est, n, data, noise);
    const Loss loss = config_.problem == ScalingProblem::KaryL2 ? Loss::L2 : Loss::TV;
    return estimation_loss(estimate, kary_[m], loss);
  }

  // Coordinate means with Laplace(d / (n eps)) noise, clamped to [0, 1];
  // the loss is the exact TV between Bernoulli products.
  double product_loss(std::size_t m, std::size_t n, Rng& data, Rng& noise) const {
    const auto& truth = products_[m];
    const std::size_t d = truth.d();
    const auto sample = sample_dataset(truth, n, data);
    std::vector<std::size_t> ones(d, 0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < d; ++j) ones[j] += sample.values[r * d + j];
    const double scale = double(d) / (double(n) * setup_.epsilon);
    std::vector<ProbVector> marginals;
    marginals.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double mean =
          std::clamp(double(ones[j]) / double(n) + scale * noise.laplace(1.0), 0.0, 1.0);
      marginals.emplace_back(std::vector<double>{1.0 - mean, mean});
    }
    return product_tv_exact(ProductDist(std::move(marginals)), truth);
  }

  const ScalingConfig& config_;
  ScalingPointSetup setup_;
  std::vector<ProbVector> kary_;
  std::vector<ProductDist> products_;
  std::map<std::size_t, double> memo_;
  std::vector<std::pair<std::size_t, double>> evaluations_;
};

std::string describe(const std::vector<std::pair<std::size_t, double>>& evals) {
  std::string out;
  for (const auto& [n, r] : evals) out += " n=" + std::to_string(n) + ":" + fmt(r);
  return out;
}

double table_upper(ScalingProblem problem, const ScalingPointSetup& s) {
  ProblemParams params;
  Problem p = Problem::KaryTV;
  if (problem == ScalingProblem::KaryL2) p = Problem::KaryL2;
  if (problem == ScalingProblem::AssouadProduct) {
    p = Problem::Product;
    params.k = 2;
    params.d = s.size;
  } else {
    params.k = s.size;
  }
  params.alpha = s.alpha;
  for (const auto& row : sample_complexity_table(p, params, PrivacyBudget(s.epsilon, 0.0)))
    if (row.side == "upper") return row.value;
  throw Error("scaling: no upper-bound expression for " + to_string(problem));
}

// Privacy and statistical terms of the estimator's required-n law.
std::pair<double, double> error_law_terms(ScalingProblem problem, const ScalingPointSetup& s) {
  const double size = double(s.size);
  switch (problem) {
    case ScalingProblem::KaryTV:
      return {size / (s.alpha * s.epsilon), size / (s.alpha * s.alpha)};
    case ScalingProblem::KaryL2:
      return {std::sqrt(size) / (s.alpha * s.epsilon), 1.0 / (s.alpha * s.alpha)};
    case ScalingProblem::AssouadProduct:
      return {size * size / (s.alpha * s.epsilon), size / (s.alpha * s.alpha)};
  }
  return {0.0, 0.0};
}

Regime dominant_regime(ScalingProblem problem, const ScalingPointSetup& s) {
  const auto [privacy, statistical] = error_law_terms(problem, s);
  return privacy >= statistical ? Regime::Privacy : Regime::Statistical;
}

double scaling_exponent(ScalingProblem problem, Regime regime, const std::string& param) {
  const bool privacy = regime == Regime::Privacy;
  if (param == "epsilon") {
    if (!privacy) throw Error("scaling: epsilon scaling needs the privacy regime");
    return -1.0;
  }
  if (param == "alpha") return privacy ? -1.0 : -2.0;
  switch (problem) {
    case ScalingProblem::KaryTV: return 1.0;
    case ScalingProblem::KaryL2:
      if (!privacy) throw Error("scaling: k does not enter the statistical l2 rate");
      return 0.5;
    case ScalingProblem::AssouadProduct: return privacy ? 2.0 : 1.0;
  }
  return 0.0;
}

}  // namespace

Regime parse_regime(const std::string& name) {
  if (name == "auto") return Regime::Auto;
  if (name == "privacy") return Regime::Privacy;
  if (name == "statistical") return Regime::Statistical;
  throw Error("unknown regime '" + name + "' (expected auto, privacy or statistical)");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Auto: return "auto";
    case Regime::Privacy: return "privacy";
    case Regime::Statistical: return "statistical";
  }
  return "?";
}

ScalingReport scaling_check(const ScalingConfig& config) {
  config.validate();
  ScalingReport report;
  report.config = config;
  {
    ScalingPointSetup first{config.k, config.alpha, config.epsilon, 0.0};
    const double v = config.values.front();
    if (config.scale_param == "k" || config.scale_param == "d") first.size = std::size_t(v);
    if (config.scale_param == "alpha") first.alpha = v;
    if (config.scale_param == "epsilon") first.epsilon = v;
    report.regime = config.regime != Regime::Auto ? config.regime : dominant_regime(config.problem, first);
    report.exponent = scaling_exponent(config.problem, report.regime, config.scale_param);
  }
  for (double v : config.values) {
    ScalingPointSetup setup{config.k, config.alpha, config.epsilon, 0.0};
    if (config.scale_param == "k" || config.scale_param == "d") setup.size = std::size_t(v);
    if (config.scale_param == "alpha") setup.alpha = v;
    if (config.scale_param == "epsilon") setup.epsilon = v;
    setup.target = config.target.value_or(setup.alpha);

    ScalingPoint point;
    point.value = v;
    point.table_value = table_upper(config.problem, setup);
    ScalingEvaluator eval(config, setup);
    const double target = setup.target;
    auto fail = [&](const std::string& why) {
      throw Error("scaling: " + why + " at " + config.scale_param + "=" + fmt(v) + " (target " +
                  fmt(target) + "); evaluated:" + describe(eval.evaluations()));
    };

    std::size_t guess = std::clamp<std::size_t>(std::size_t(std::llround(point.table_value)), 1,
                                                config.n_max);
    std::size_t lo = 0, hi = 0;
    if (eval.risk(guess) <= target) {
      hi = guess;
      lo = guess / 2;
      while (lo >= 1 && eval.risk(lo) <= target) {
        hi = lo;
        lo /= 2;
      }
      if (lo == 0) fail("risk is already below the target at n=1");
    } else {
      lo = guess;
      hi = guess * 2;
      while (eval.risk(hi) > target) {
        lo = hi;
        if (hi >= config.n_max) fail("bisection failed to bracket below n_max");
        hi = std::min(hi * 2, config.n_max);
      }
    }
    while (hi - lo > std::max<std::size_t>(1, std::size_t(config.rel_tolerance * double(lo)))) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (eval.risk(mid) <= target)
        hi = mid;
      else
        lo = mid;
    }
    point.required_n = hi;
    point.risk_at_n = eval.risk(hi);
    point.evaluations = eval.evaluations();
    report.points.push_back(std::move(point));
  }

  report.passed = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    ScalingStep step;
    double observed = double(report.points[i].required_n) / double(report.points[i - 1].required_n);
    double expected = std::pow(report.points[i].value / report.points[i - 1].value, report.exponent);
    if (expected < 1.0) {
      observed = 1.0 / observed;
      expected = 1.0 / expected;
    }
    step.observed_ratio = observed;
    step.expected_ratio = expected;
    step.band_lo = 1.0 + 0.5 * (expected - 1.0);
    step.band_hi = 1.0 + 1.5 * (expected - 1.0);
    step.passed = observed >= step.band_lo && observed <= step.band_hi;
    report.passed = report.passed && step.passed;
    report.steps.push_back(step);
  }
  return report;
}

Json to_json(const ScalingReport& report) {
  const auto& c = report.config;
  Json points = Json::array();
  for (const auto& p : report.points) {
    Json evals = Json::array();
    for (const auto& [n, r] : p.evaluations) evals.push_back(Json{{"n", n}, {"risk", r}});
    points.push_back(Json{{c.scale_param, p.value},
                          {"required_n", p.required_n},
                          {"risk_at_n", p.risk_at_n},
                          {"table_upper", p.table_value},
                          {"evaluations", evals}});
  }
  Json steps = Json::array();
  for (const auto& s : report.steps)
    steps.push_back(Json{{"observed_ratio", s.observed_ratio},
                         {"expected_ratio", s.expected_ratio},
                         {"band", {s.band_lo, s.band_hi}},
                         {"passed", s.passed}});
  return Json{{"problem", to_string(c.problem)},
              {"k_or_d", c.k},
              {"alpha", c.alpha},
              {"epsilon", c.epsilon},
              {"scale_param", c.scale_param},
              {"regime", to_string(report.regime)},
              {"exponent", report.exponent},
              {"values", c.values},
              {"target", json_number(c.target.value_or(kNaN))},
              {"trials", c.trials},
              {"seed", c.seed},
              {"points", points},
              {"steps", steps},
              {"pass", report.passed}};
}

}  // namespace dpminimax
