// Python bindings. Structured results cross the boundary as JSON text and are
// decoded with the standard json module, so Python sees plain dicts and lists.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "dpminimax/bounds.hpp"
#include "dpminimax/codes.hpp"
#include "dpminimax/couplings.hpp"
#include "dpminimax/harness.hpp"
#include "dpminimax/io.hpp"
#include "dpminimax/mechanisms.hpp"
#include "dpminimax/packings.hpp"

namespace py = pybind11;
using namespace dpminimax;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return parse_json(text, "<python>");
}

PackingFamily make_packing(const std::string& kind, std::size_t k, double alpha, std::size_t d,
                           std::optional<std::size_t> max_members) {
  if (kind == "kary_tv") return kary_tv_packing(k, alpha, max_members);
  if (kind == "kary_l2") return kary_l2_packing(k, alpha, max_members);
  if (kind == "product") return product_packing(k, d, alpha, true, max_members);
  throw Error("packing: unknown kind '" + kind + "' (kary_tv, kary_l2, product)");
}

std::unique_ptr<CouplingSampler> make_coupling(const std::string& kind, std::size_t size, double alpha,
                                               std::size_t n, std::size_t i) {
  if (kind == "assouad_kary") return assouad_kary_coupling(size, alpha, n, i);
  if (kind == "product_flip") return product_flip_coupling(size, alpha, n, i);
  throw Error("coupling: unknown kind '" + kind + "' (assouad_kary, product_flip)");
}

}  // namespace

PYBIND11_MODULE(_dpminimax, m) {
  m.doc() = "Minimax bounds and Monte Carlo risk for differentially private estimation";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("version", &version);

  m.def(
      "le_cam_bound",
      [](double tv, double D, double epsilon, double delta) {
        return to_py(to_json(le_cam_bound(tv, D, PrivacyBudget(epsilon, delta))));
      },
      py::arg("tv"), py::arg("D"), py::arg("epsilon"), py::arg("delta") = 0.0);
  m.def(
      "fano_bound",
      [](double alpha, double beta, double D, double M, double epsilon) {
        return to_py(to_json(fano_bound(alpha, beta, D, M, epsilon)));
      },
      py::arg("alpha"), py::arg("beta"), py::arg("D"), py::arg("M"), py::arg("epsilon"));
  m.def(
      "assouad_bound",
      [](std::size_t k_index, double tau, double D, double epsilon, double delta) {
        return to_py(to_json(assouad_bound(k_index, tau, D, PrivacyBudget(epsilon, delta))));
      },
      py::arg("k_index"), py::arg("tau"), py::arg("D"), py::arg("epsilon"), py::arg("delta") = 0.0);
  m.def(
      "sample_complexity_table",
      [](const std::string& problem, std::size_t k, std::size_t d, double alpha, double R,
         double epsilon, double delta) {
        ProblemParams params;
        params.k = k;
        params.d = d;
        params.alpha = alpha;
        params.R = R;
        return to_py(to_json(sample_complexity_table(parse_problem(problem), params,
                                                     PrivacyBudget(epsilon, delta))));
      },
      py::arg("problem"), py::arg("k") = 0, py::arg("d") = 1, py::arg("alpha"), py::arg("R") = 1.0,
      py::arg("epsilon"), py::arg("delta") = 0.0);

  m.def(
      "gv_constant_weight",
      [](std::size_t k, std::size_t l, std::optional<std::size_t> max_words) {
        return to_py(to_json(gv_constant_weight(k, l, max_words)));
      },
      py::arg("k"), py::arg("l"), py::arg("max_words") = py::none());
  m.def(
      "gv_qary",
      [](std::uint32_t h, std::size_t d, std::optional<std::size_t> max_words) {
        return to_py(to_json(gv_qary(h, d, max_words)));
      },
      py::arg("h"), py::arg("d"), py::arg("max_words") = py::none());

  m.def(
      "packing",
      [](const std::string& kind, std::size_t k, double alpha, std::size_t d,
         std::optional<std::size_t> max_members) {
        return to_py(to_json(make_packing(kind, k, alpha, d, max_members)));
      },
      py::arg("kind"), py::arg("k"), py::arg("alpha"), py::arg("d") = 1,
      py::arg("max_members") = py::none());
  m.def(
      "verify_family",
      [](const py::object& family) { return to_py(to_json(verify_family(family_from_json(from_py(family))))); },
      py::arg("family"));

  m.def(
      "expected_hamming",
      [](const std::string& kind, std::size_t size, double alpha, std::size_t n, std::size_t i) {
        return make_coupling(kind, size, alpha, n, i)->expected_hamming();
      },
      py::arg("kind"), py::arg("size"), py::arg("alpha"), py::arg("n"), py::arg("i") = 0);
  m.def(
      "empirical_hamming",
      [](const std::string& kind, std::size_t size, double alpha, std::size_t n, std::size_t i,
         std::size_t trials, std::uint64_t seed) {
        const auto sampler = make_coupling(kind, size, alpha, n, i);
        Rng rng(seed);
        const auto est = empirical_hamming(*sampler, trials, rng);
        return std::make_pair(est.estimate, est.std_error);
      },
      py::arg("kind"), py::arg("size"), py::arg("alpha"), py::arg("n"), py::arg("i") = 0,
      py::arg("trials") = 10000, py::arg("seed") = 0);

  m.def(
      "project_simplex",
      [](const std::vector<double>& v) {
        const auto p = project_simplex(v);
        return std::vector<double>(p.probs().begin(), p.probs().end());
      },
      py::arg("v"));
  m.def(
      "laplace_estimator",
      [](const std::vector<std::uint32_t>& symbols, std::size_t k, double epsilon, std::uint64_t seed) {
        Rng rng(seed);
        const auto p = laplace_estimator(Dataset(SymbolData{symbols}), k, epsilon, rng);
        return std::vector<double>(p.probs().begin(), p.probs().end());
      },
      py::arg("symbols"), py::arg("k"), py::arg("epsilon"), py::arg("seed") = 0);
  m.def(
      "check_dp",
      [](std::size_t n_bits, double rr_epsilon, double epsilon) {
        return check_dp(randomized_response(n_bits, rr_epsilon), epsilon);
      },
      py::arg("n_bits"), py::arg("rr_epsilon"), py::arg("epsilon"),
      "Smallest delta for which randomized response over n_bits bits is (epsilon, delta)-DP.");

  m.def(
      "run_experiment",
      [](const std::string& config_path, const std::string& output, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> threads) {
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config_path, output, seed, threads);
        }
        return to_py(result.json);
      },
      py::arg("config_path"), py::arg("output") = "", py::arg("seed") = py::none(),
      py::arg("threads") = py::none());
  m.def(
      "scaling_check",
      [](const std::string& problem, const std::string& param, const std::vector<double>& values,
         std::size_t k, double alpha, double epsilon, const std::string& regime, std::size_t trials,
         std::uint64_t seed, std::size_t threads) {
        ScalingConfig config;
        config.problem = parse_scaling_problem(problem);
        config.scale_param = param;
        config.values = values;
        config.k = k;
        config.alpha = alpha;
        config.epsilon = epsilon;
        config.regime = parse_regime(regime);
        config.trials = trials;
        config.seed = seed;
        config.threads = threads;
        ScalingReport report;
        {
          py::gil_scoped_release release;
          report = scaling_check(config);
        }
        return to_py(to_json(report));
      },
      py::arg("problem"), py::arg("param"), py::arg("values"), py::arg("k") = 10,
      py::arg("alpha") = 0.2, py::arg("epsilon") = 0.2, py::arg("regime") = "auto",
      py::arg("trials") = 200, py::arg("seed") = 0, py::arg("threads") = 1);
}
