#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpminimax/core.hpp"

namespace dpminimax {

/// A lower-bound value together with the terms it is the maximum of.
/// Every term is already clamped at zero.
struct BoundReport {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  std::string binding_term;

  double term(const std::string& name) const;
};

/// Private Le Cam two-point bound:
/// 1/2 * max{1 - tv, 0.9 exp(-10 eps D) - 10 D delta}.
BoundReport le_cam_bound(double tv, double D, const PrivacyBudget& budget);

/// Private Fano bound over M hypotheses:
/// max{alpha/2 (1 - (beta + ln 2)/ln M), 0.4 alpha min(1, M exp(-10 eps D))}.
/// M is taken as a real so that boundary cases such as M = e^{10 eps D} are exact.
BoundReport fano_bound(double alpha, double beta, double D, double M, double epsilon);

/// Private Assouad bound: (k tau / 2) * max(0, 0.9 exp(-10 eps D) - 10 D delta).
BoundReport assouad_bound(std::size_t k_index, double tau, double D, const PrivacyBudget& budget);

struct SampleThresholds {
  std::uint64_t n_classical = 0;
  std::uint64_t n_private = 0;
};

/// Largest n at which each risk term of the packing argument still exceeds tau:
///   (3 tau / 2)(1 - (n beta + ln 2)/ln M) > tau   and
///   1.2 tau min{1, M exp(-10 eps n gamma)} > tau.
SampleThresholds fano_sample_complexity(double alpha_sep, double beta, double gamma, double M,
                                        double epsilon, double tau);

/// The two risk terms above, evaluated at a given n.
double fano_classical_term(double beta, double M, double tau, std::uint64_t n);
double fano_private_term(double gamma, double M, double epsilon, double tau, std::uint64_t n);

/// ln M / d, the unscaled packing lower bound on epsilon.
double packing_bound(double M, double d);

struct GroupFactor {
  double multiplier = 1.0;
  double additive = 0.0;
};

/// (e^{t eps}, delta t e^{eps (t-1)}): the group-privacy guarantee at distance t.
GroupFactor group_privacy_factor(const PrivacyBudget& budget, std::uint64_t t);

enum class Problem { KaryTV, KaryL2, Product, GaussianMixture };

Problem parse_problem(const std::string& name);
std::string to_string(Problem problem);

struct ProblemParams {
  std::size_t k = 0;
  std::size_t d = 1;
  double alpha = 0.0;
  double R = 1.0;
};

/// One evaluated expression of the sample-complexity summary. Values carry no
/// hidden constants (`unscaled` is always true).
struct TableRow {
  std::string problem;
  std::string side;     // "upper" or "lower"
  std::string privacy;  // "pure" or "approximate"
  std::string expression;
  std::string source;
  double value = 0.0;
  bool unscaled = true;
};

/// Upper- and lower-bound rows for `problem`; pure-DP rows when delta = 0,
/// approximate-DP rows otherwise.
std::vector<TableRow> sample_complexity_table(Problem problem, const ProblemParams& params,
                                              const PrivacyBudget& budget);

}  // namespace dpminimax
