#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpminimax/core.hpp"

namespace dpminimax {

/// A randomized algorithm over a finite dataset space, tabulated as
/// table[x][o] = P[output o | dataset x].
struct FiniteMechanism {
  std::vector<std::vector<std::int64_t>> datasets;
  std::vector<std::string> outputs;
  std::vector<std::vector<double>> table;

  /// Rows must be nonnegative and sum to 1 within 1e-9.
  void validate() const;
  /// Index of a dataset in the tabulation; throws if absent.
  std::size_t index_of(std::span<const std::int64_t> dataset) const;
};

/// Ordered neighbor pairs given by dataset value. Empty means: all tabulated
/// datasets of equal length at Hamming distance 1.
struct NeighborRelation {
  std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> pairs;
};

/// Tight delta for the given epsilon: max over ordered neighboring pairs
/// (x, y) of sum_o max(0, P(o|x) - e^eps P(o|y)).
double check_dp(const FiniteMechanism& mech, double epsilon, const NeighborRelation& relation = {},
                std::size_t threads = 1);

/// max over pairs at Hamming distance 1..t of
/// sum_o max(0, P(o|x) - e^{t eps} P(o|y)) - delta t e^{eps (t-1)}.
/// A value <= 0 certifies the group-privacy guarantee at distance t.
double group_dp_check(const FiniteMechanism& mech, double epsilon, double delta, std::size_t t,
                      std::size_t threads = 1);

/// Randomized response on n independent bits, each flipped with
/// probability 1 / (1 + e^eps). Datasets and outputs are all 2^n bit strings.
FiniteMechanism randomized_response(std::size_t n_bits, double epsilon);

/// Euclidean projection onto the probability simplex by sort and threshold.
ProbVector project_simplex(std::span<const double> v);

/// KKT residual of w as the projection of v: the largest deviation from a
/// uniform shift on the support, positive slack off the support, and the
/// gap of sum(w) from 1.
double kkt_residual(std::span<const double> v, std::span<const double> w);

/// Empirical frequencies of symbols 0..k-1.
ProbVector empirical_estimator(const Dataset& data, std::size_t k);

/// Empirical frequencies plus i.i.d. Laplace(2/(n eps)) noise, projected onto
/// the simplex.
ProbVector laplace_estimator(const Dataset& data, std::size_t k, double epsilon, Rng& rng);

/// Same mechanism with the noise given as standard Laplace(1) draws, which
/// are scaled by 2/(n eps). Lets callers reuse noise across sample sizes.
ProbVector laplace_estimator_with_noise(std::span<const std::uint32_t> symbols, std::size_t k,
                                        double epsilon, std::span<const double> unit_noise);

enum class EstimatorKind { Empirical, Laplace };

EstimatorKind parse_estimator(const std::string& name);
std::string to_string(EstimatorKind kind);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::Laplace;
  std::size_t k = 0;
  PrivacyBudget budget{1.0, 0.0};
  std::uint64_t seed = 0;

  /// Laplace requires epsilon > 0.
  void validate() const;
};

/// Discretizes laplace_estimator on binary data of length n: the output is
/// the grid cell of the estimated mass of symbol 0 among `cells` equal cells.
/// Rows are estimated from `samples` draws per dataset.
FiniteMechanism tabulate_laplace_estimator(std::size_t n, double epsilon, std::size_t cells,
                                           std::size_t samples, Rng& rng, std::size_t threads = 1);

}  // namespace dpminimax
