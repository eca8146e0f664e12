#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dpminimax/random.hpp"

namespace dpminimax {

/// Raised for violated preconditions and malformed inputs across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability mass function over symbols 0..k-1.
///
/// Entries must be finite and nonnegative. Inputs whose total is within 1e-6
/// of one are renormalized; anything further off is rejected. After
/// construction the total is within 1e-9 of one.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;
  static constexpr double kRenormalizeTolerance = 1e-6;

  explicit ProbVector(std::vector<double> probs);

  static ProbVector uniform(std::size_t k);
  static ProbVector point_mass(std::size_t k, std::size_t symbol);

  std::size_t k() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  /// Running sums, used for inverse-CDF sampling.
  std::span<const double> cdf() const { return cdf_; }

  friend bool operator==(const ProbVector& a, const ProbVector& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Product of d marginals over a common alphabet [k].
class ProductDist {
 public:
  explicit ProductDist(std::vector<ProbVector> marginals);

  std::size_t d() const { return marginals_.size(); }
  std::size_t k() const { return marginals_.front().k(); }
  const ProbVector& marginal(std::size_t i) const { return marginals_[i]; }
  const std::vector<ProbVector>& marginals() const { return marginals_; }

  friend bool operator==(const ProductDist&, const ProductDist&) = default;

 private:
  std::vector<ProbVector> marginals_;
};

/// Mixture of identity-covariance Gaussians with means inside the R-ball.
class GaussianMixtureSpec {
 public:
  GaussianMixtureSpec(std::vector<double> weights, std::vector<std::vector<double>> means,
                      double norm_bound);

  std::size_t components() const { return weights_.size(); }
  std::size_t dim() const { return means_.front().size(); }
  double norm_bound() const { return norm_bound_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& means() const { return means_; }
  std::span<const double> weight_cdf() const { return weight_cdf_; }

  /// log of the mixture density at z, evaluated with log-sum-exp.
  double log_density(std::span<const double> z) const;

  friend bool operator==(const GaussianMixtureSpec&, const GaussianMixtureSpec&) = default;

 private:
  std::vector<double> weights_;
  std::vector<double> weight_cdf_;
  std::vector<std::vector<double>> means_;
  double norm_bound_;
};

using Distribution = std::variant<ProbVector, ProductDist, GaussianMixtureSpec>;

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del);
};

/// Sequence of k-ary symbols.
struct SymbolData {
  std::vector<std::uint32_t> symbols;
};

/// Sequence of fixed-width records (product-distribution draws), row-major.
struct RecordData {
  std::size_t width = 0;
  std::vector<std::uint32_t> values;

  std::span<const std::uint32_t> record(std::size_t t) const {
    return {values.data() + t * width, width};
  }
};

/// Sequence of points in R^dim, row-major.
struct PointData {
  std::size_t dim = 0;
  std::vector<double> coords;
};

using Dataset = std::variant<SymbolData, RecordData, PointData>;

std::size_t dataset_size(const Dataset& data);

/// Number of records at which two equal-length datasets differ. A record that
/// differs in any of its coordinates counts once.
std::size_t hamming(const Dataset& x, const Dataset& y);

enum class Metric { TV, KL, Chi2, L1, L2 };

/// Distance between two pmfs on the same alphabet. KL and chi-square return
/// +inf when q vanishes on a symbol p charges (0 log 0 = 0).
double distance(const ProbVector& p, const ProbVector& q, Metric metric);

/// KL between product distributions, summed coordinate-wise.
double kl_divergence(const ProductDist& p, const ProductDist& q);

/// Exact TV between product distributions by enumerating the coordinates on
/// which the marginals differ (identical coordinates integrate out).
/// Throws when the enumeration would exceed `atom_cap` atoms.
double product_tv_exact(const ProductDist& p, const ProductDist& q,
                        std::size_t atom_cap = std::size_t{1} << 24);

/// KL(N(mu1, I) || N(mu2, I)) = |mu1 - mu2|^2 / 2.
double gaussian_component_kl(std::span<const double> mu1, std::span<const double> mu2);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo TV between two Gaussian mixtures. Draws z from the average
/// measure (m1 + m2) / 2 and averages |m1(z) - m2(z)| / (m1(z) + m2(z)),
/// whose values lie in [0, 1].
McEstimate mixture_tv_mc(const GaussianMixtureSpec& m1, const GaussianMixtureSpec& m2,
                         std::size_t samples, Rng& rng);

SymbolData sample_dataset(const ProbVector& dist, std::size_t n, Rng& rng);
RecordData sample_dataset(const ProductDist& dist, std::size_t n, Rng& rng);
PointData sample_dataset(const GaussianMixtureSpec& dist, std::size_t n, Rng& rng);
Dataset sample_dataset(const Distribution& dist, std::size_t n, Rng& rng);

/// Sum in a fixed pairwise order; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Sample mean and standard error of the mean.
McEstimate mean_and_stderr(std::span<const double> values);

}  // namespace dpminimax
