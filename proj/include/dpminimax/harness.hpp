#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpminimax/core.hpp"
#include "dpminimax/io.hpp"
#include "dpminimax/mechanisms.hpp"
#include "dpminimax/packings.hpp"

namespace dpminimax {

/// Git description of the build, or "unknown".
std::string version();

/// One component of an experiment family. Kinds: "kary_tv" and "kary_l2"
/// (packings), "assouad_kary" (all 2^{k/2} hypercube members), "explicit"
/// (members listed by hand).
struct FamilySpec {
  std::string kind;
  std::size_t k = 0;
  double alpha = 0.0;
  std::optional<std::size_t> max_members;
  std::vector<ProbVector> members;
};

struct ExperimentConfig {
  std::vector<FamilySpec> family;
  EstimatorConfig estimator;
  Loss loss = Loss::TV;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::string output_path;
  std::size_t threads = 1;
  /// Reuse each (member, trial) data stream and noise draws across n.
  bool common_random_numbers = false;
  /// Width of pass/fail bands in standard errors.
  double band_sigma = 3.0;
  /// Width used for lower-bound consistency checks.
  double hard_sigma = 4.0;
  /// When set, the max-over-members risk at the largest n must not exceed it.
  std::optional<double> risk_ceiling;

  void validate() const;
};

/// Parses a schema-1 experiment config. Errors carry source:line.
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source);
Json to_json(const ExperimentConfig& config);

/// Materialized family: members with labels and the data the bound
/// evaluators need.
struct FamilyComponent {
  std::string kind;
  std::size_t first = 0;  // index of the first member in the flat list
  std::size_t count = 0;
  std::optional<PackingFamily> packing;
  std::optional<HypercubeFamily> hypercube;
};

struct MaterializedFamily {
  std::vector<ProbVector> members;
  std::vector<std::string> labels;
  std::vector<FamilyComponent> components;
  std::size_t k = 0;
};

/// Builds every component; throws when the family exceeds 2000 members or
/// the components disagree on k.
MaterializedFamily materialize(const std::vector<FamilySpec>& family);

struct CellRisk {
  std::size_t member = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_loss = 0.0;
  double std_error = 0.0;
};

/// Lower bounds at matched parameters; NaN when the method does not apply.
struct MatchedBounds {
  double lecam;
  double fano;
  double assouad;
};

struct RiskReport {
  std::vector<std::string> labels;
  std::vector<std::size_t> n_grid;
  /// n-major: cells[i * members + m] is member m at n_grid[i].
  std::vector<CellRisk> cells;
  std::vector<double> max_risk;
  std::vector<double> max_risk_stderr;
  std::vector<std::size_t> argmax;
  std::vector<MatchedBounds> bounds;
  double wall_time_s = 0.0;
  std::size_t threads = 1;

  const CellRisk& cell(std::size_t n_index, std::size_t member) const {
    return cells[n_index * labels.size() + member];
  }
};

/// Loss of a k-ary estimate against the truth.
double estimation_loss(const ProbVector& estimate, const ProbVector& truth, Loss loss);

/// Runs the estimator on `trials` fresh datasets for every (member, n).
RiskReport monte_carlo_risk(const ExperimentConfig& config);

/// Evaluates the Le Cam, Fano and Assouad bounds matched to the family at n.
MatchedBounds matched_bounds(const MaterializedFamily& family, Loss loss,
                             const PrivacyBudget& budget, std::size_t n);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Lower-bound consistency, monotonicity in n, and the optional ceiling.
std::vector<Check> report_checks(const RiskReport& report, const ExperimentConfig& config);

Json to_json(const RiskReport& report);
std::string to_csv(const RiskReport& report);

struct ExperimentResult {
  RiskReport report;
  std::vector<Check> checks;
  Json json;
  bool passed = false;
};

/// Parses the config file, runs the experiment and its checks, and writes
/// <prefix>.json and <prefix>.csv when an output path is configured.
/// `output_override` replaces the configured output path when nonempty.
ExperimentResult run_experiment(const std::string& config_path,
                                const std::string& output_override = "",
                                std::optional<std::uint64_t> seed_override = std::nullopt,
                                std::optional<std::size_t> threads_override = std::nullopt);
ExperimentResult run_experiment(const ExperimentConfig& config, const Json& config_json);

/// Compares fresh cells with a stored report (or its "report" section):
/// each mean loss must lie within sigma * hypot(se_old, se_new).
std::vector<Check> compare_to_golden(const Json& golden, const RiskReport& report, double sigma);

enum class ScalingProblem { KaryTV, KaryL2, AssouadProduct };
ScalingProblem parse_scaling_problem(const std::string& name);
std::string to_string(ScalingProblem problem);

/// Which term of the estimator's error dominates. Auto picks privacy when
/// the privacy term of the error model is at least the statistical term at
/// the first scaled value.
enum class Regime { Auto, Privacy, Statistical };
Regime parse_regime(const std::string& name);
std::string to_string(Regime regime);

struct ScalingConfig {
  ScalingProblem problem = ScalingProblem::KaryTV;
  std::size_t k = 10;  // alphabet size, or dimension d for the product problem
  double alpha = 0.2;
  double epsilon = 0.2;
  /// Parameter being scaled: "k", "d", "alpha" or "epsilon".
  std::string scale_param = "k";
  std::vector<double> values;
  Regime regime = Regime::Auto;
  /// Risk the estimator must reach; defaults to alpha.
  std::optional<double> target;
  std::size_t trials = 200;
  std::size_t extra_members = 8;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t n_max = 10000000;
  /// Bisection stops when the bracket is within this relative width.
  double rel_tolerance = 0.01;

  void validate() const;
};

struct ScalingPoint {
  double value = 0.0;
  std::size_t required_n = 0;
  double risk_at_n = 0.0;
  double table_value = 0.0;
  std::vector<std::pair<std::size_t, double>> evaluations;
};

struct ScalingStep {
  double observed_ratio = 0.0;
  double expected_ratio = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool passed = false;
};

struct ScalingReport {
  ScalingConfig config;
  Regime regime = Regime::Privacy;
  /// Power of the scaled parameter in the required-n law of the regime.
  double exponent = 0.0;
  std::vector<ScalingPoint> points;
  std::vector<ScalingStep> steps;
  bool passed = false;
};

/// Finds, for every value of the scaled parameter, the least n at which the
/// Laplace estimator's max-over-members risk reaches the target (doubling to
/// bracket, then integer bisection, common random numbers throughout).
///
/// Consecutive ratios are compared with (v'/v)^exponent, where the exponent
/// comes from the estimator's error law in the chosen regime:
///   kary_tv          n ~ k/(a eps)        | k/a^2
///   kary_l2          n ~ sqrt(k)/(a eps)  | 1/a^2
///   assouad_product  n ~ d^2/(a eps)      | d/a^2
/// (privacy | statistical). With e the expected ratio (inverted when below
/// one), the observed ratio must lie in [1 + (e-1)/2, 1 + 3(e-1)/2].
ScalingReport scaling_check(const ScalingConfig& config);
Json to_json(const ScalingReport& report);

}  // namespace dpminimax
