#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpminimax/codes.hpp"
#include "dpminimax/core.hpp"

namespace dpminimax {

enum class Loss { TV, L2 };

/// A finite family of distributions that are pairwise far apart in the loss
/// but pairwise close in KL and TV.
///
/// `separation` is the claimed pairwise lower bound in `loss`. It is absent
/// for constructions whose separation constant is not explicit; verification
/// then reports the measured minimum without asserting one.
struct PackingFamily {
  std::string kind;
  std::vector<Distribution> members;
  std::optional<double> separation;
  double kl_cap = std::numeric_limits<double>::infinity();
  std::optional<double> tv_cap;
  Loss loss = Loss::TV;
  std::map<std::string, double> params;
  std::vector<Code> codes;
  std::vector<std::string> notes;

  std::size_t size() const { return members.size(); }
};

struct VerifyOptions {
  std::size_t member_cap = 2000;
  std::size_t atom_cap = std::size_t{1} << 24;
  /// Exact product TV is enumerated for at most this many pairs.
  std::size_t product_tv_pairs = 200;
  /// Monte Carlo samples per pair for mixture TV; 0 skips the estimate.
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

struct VerificationReport {
  std::size_t members = 0;
  std::size_t pairs_checked = 0;
  bool exhaustive = true;
  double min_separation = std::numeric_limits<double>::infinity();
  double min_tv = std::numeric_limits<double>::infinity();
  double max_tv = 0.0;
  double max_kl = 0.0;
  std::size_t tv_pairs_checked = 0;
  bool separation_ok = true;
  bool kl_ok = true;
  bool tv_ok = true;
  std::vector<std::string> notes;

  bool passed() const { return separation_ok && kl_ok && tv_ok; }
};

/// k-ary members (1 +/- 24 alpha)/k following a weight-k/2 code; TV loss.
PackingFamily kary_tv_packing(std::size_t k, double alpha,
                              std::optional<std::size_t> max_members = std::nullopt);

/// k-ary members uniform on the support of a weight-l code, l = floor(1/(50 alpha^2)); L2 loss.
PackingFamily kary_l2_packing(std::size_t k, double alpha,
                              std::optional<std::size_t> max_members = std::nullopt);

/// (k,d)-product members: an outer h-ary code picks, per coordinate, one of h
/// perturbed k-ary marginals built from an inner constant-weight code.
PackingFamily product_packing(std::size_t k, std::size_t d, double alpha, bool balanced = true,
                              std::optional<std::size_t> max_members = std::nullopt,
                              std::size_t inner_words = 16);

struct GaussianPackingOptions {
  std::size_t inner_words = 16;
  std::optional<std::size_t> max_members;
  std::uint64_t seed = 0;
  std::size_t placement_attempts = 200000;
};

/// Uniform k-component mixtures of N(mu, I_d) whose component means combine a
/// small code-driven shift with a large per-component offset.
PackingFamily gaussian_mixture_packing(std::size_t k, std::size_t d, double alpha, double R,
                                       const GaussianPackingOptions& options = {});

VerificationReport verify_family(const PackingFamily& family, const VerifyOptions& options = {});

/// Convexity bound on mixture KL: average over aligned components of the
/// component KL. Both mixtures must have the same number of components.
double mixture_kl_convexity_bound(const GaussianMixtureSpec& a, const GaussianMixtureSpec& b);

/// Family indexed by the sign hypercube {-1,+1}^index_dim whose loss
/// decomposes as l(p_u, p_v) >= 2 tau * #{i : u_i != v_i}.
class HypercubeFamily {
 public:
  enum class Kind { Kary, BernoulliProduct };

  static HypercubeFamily kary(std::size_t k, double alpha, std::size_t n);
  static HypercubeFamily bernoulli_product(std::size_t d, double alpha, std::size_t n);

  Kind kind() const { return kind_; }
  std::size_t index_dim() const { return index_dim_; }
  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  std::size_t n() const { return n_; }
  /// Alphabet size k for the k-ary family, dimension d for the product family.
  std::size_t size_param() const { return size_param_; }

  ProbVector kary_member(std::span<const int> signs) const;
  ProductDist product_member(std::span<const int> signs) const;
  Distribution member(std::span<const int> signs) const;

  /// Law of one record under the mixture p_{+i} (sign = +1) or p_{-i}.
  Distribution mixture_marginal(std::size_t i, int sign) const;

  /// All sign vectors in lexicographic order (-1 before +1); throws above `cap`.
  std::vector<std::vector<int>> sign_vectors(std::size_t cap = 2000) const;

 private:
  HypercubeFamily(Kind kind, std::size_t size_param, std::size_t index_dim, double alpha,
                  double tau, std::size_t n)
      : kind_(kind), size_param_(size_param), index_dim_(index_dim), alpha_(alpha), tau_(tau),
        n_(n) {}

  void check_signs(std::span<const int> signs) const;

  Kind kind_;
  std::size_t size_param_;
  std::size_t index_dim_;
  double alpha_;
  double tau_;
  std::size_t n_;
};

/// p_e(2i) = (1 + 10 e_i alpha)/k, p_e(2i+1) = (1 - 10 e_i alpha)/k; tau = 10 alpha / k.
HypercubeFamily assouad_kary_family(std::size_t k, double alpha, std::size_t n);

/// Bernoulli products with means (1 + 20 e_i alpha)/d; tau = 2.5 alpha / d.
HypercubeFamily assouad_product_family(std::size_t d, double alpha, std::size_t n);

struct HypercubeReport {
  std::size_t pairs_checked = 0;
  bool exhaustive = true;
  /// min over checked pairs of TV(p_u, p_v) / (2 tau d_H(u, v))
  double min_ratio = std::numeric_limits<double>::infinity();
  /// max over checked pairs of |TV(p_u, p_v) - 2 tau d_H(u, v)|
  double max_equality_gap = 0.0;
  bool decomposition_ok = true;
};

HypercubeReport verify_hypercube(const HypercubeFamily& family, const VerifyOptions& options = {});

/// P_u[A] - P_v[A] for A = {all coordinates in S' are 0}, where u is -1 and v
/// is +1 on the |S'| coordinates of S' and the two agree elsewhere.
double bernoulli_zero_event_gap(std::size_t d, double alpha, std::size_t s_prime);

}  // namespace dpminimax
