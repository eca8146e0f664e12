#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "dpminimax/core.hpp"
#include "dpminimax/packings.hpp"

namespace dpminimax {

enum class Side { Left, Right };

/// A joint law over pairs of datasets in X^n with prescribed marginals.
class CouplingSampler {
 public:
  virtual ~CouplingSampler() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t n() const = 0;
  virtual std::pair<Dataset, Dataset> draw(Rng& rng) const = 0;

  /// Law of a single record on one side; empty for continuous marginals.
  virtual std::optional<Distribution> record_law(Side side) const = 0;

  /// Exact E[Hamming(X, Y)] of this construction.
  virtual double expected_hamming() const = 0;
  /// The bound on E[Hamming(X, Y)] that the lower-bound argument uses.
  virtual double hamming_bound() const = 0;
};

/// n independent coordinates, each maximally coupled: equal with probability
/// 1 - TV(p, q), drawn from the overlap min(p, q) / (1 - TV); otherwise drawn
/// independently from the normalized residuals.
std::unique_ptr<CouplingSampler> maximal_coupling_iid(const ProbVector& p, const ProbVector& q,
                                                      std::size_t n);

/// X ~ p_{+i} over the k-ary hypercube; Y moves each symbol 2i to 2i+1 with
/// probability 20 alpha / (1 + 10 alpha), so Y ~ p_{-i}.
std::unique_ptr<CouplingSampler> assouad_kary_coupling(std::size_t k, double alpha, std::size_t n,
                                                       std::size_t i);

/// X ~ p_{+i} over Bernoulli products; Y turns a 1 at coordinate i into 0 with
/// probability 40 alpha / (1 + 20 alpha), so Y ~ p_{-i}.
std::unique_ptr<CouplingSampler> product_flip_coupling(std::size_t d, double alpha, std::size_t n,
                                                       std::size_t i);

/// Sample mean and standard error of Hamming(X, Y). Trial t uses a stream
/// derived from (base, t) where base is drawn from `rng`, so results do not
/// depend on `threads`.
McEstimate empirical_hamming(const CouplingSampler& sampler, std::size_t trials, Rng& rng,
                             std::size_t threads = 1);

/// TV between the empirical single-record law on one side, pooled over all
/// n records of `trials` draws, and the declared record law. For product
/// records the per-coordinate laws are compared and the largest TV returned.
double marginal_check(const CouplingSampler& sampler, Side side, std::size_t trials, Rng& rng,
                      std::size_t threads = 1);

}  // namespace dpminimax
