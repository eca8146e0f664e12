#include "dpminimax/packings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpminimax/random.hpp"

namespace dpminimax {

namespace {

std::string fmt(double x) {
  std::string s = std::to_string(x);
  return s;
}

void require_even(std::size_t k, const char* what) {
  if (k < 2 || k % 2 != 0)
    throw Error(std::string(what) + ": k must be even and at least 2 (got " + std::to_string(k) +
                ")");
}

double l2_norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double loss_distance(const ProbVector& a, const ProbVector& b, Loss loss) {
  return distance(a, b, loss == Loss::TV ? Metric::TV : Metric::L2);
}

}  // namespace

PackingFamily kary_tv_packing(std::size_t k, double alpha, std::optional<std::size_t> max_members) {
  require_even(k, "kary_tv_packing");
  if (!(alpha > 0.0 && alpha < 1.0 / 48.0))
    throw Error("kary_tv_packing: alpha must lie in (0, 1/48), got " + fmt(alpha));

  PackingFamily family;
  family.kind = "kary-tv";
  family.loss = Loss::TV;
  family.params = {{"k", double(k)}, {"alpha", alpha}};
  if (k < 40) family.notes.push_back("k < 40: code size guarantee waived (weight k/2 < 20)");

  Code code = gv_constant_weight(k, k / 2, max_members);
  const double hi = (1.0 + 24.0 * alpha) / double(k);
  const double lo = (1.0 - 24.0 * alpha) / double(k);
  for (const auto& word : code.words) {
    std::vector<double> probs(k);
    for (std::size_t i = 0; i < k; ++i) probs[i] = word[i] ? hi : lo;
    family.members.emplace_back(ProbVector(std::move(probs)));
  }
  family.separation = 3.0 * alpha;
  family.tv_cap = 24.0 * alpha;
  family.kl_cap = 10000.0 * alpha * alpha;
  family.codes.push_back(std::move(code));
  return family;
}

PackingFamily kary_l2_packing(std::size_t k, double alpha, std::optional<std::size_t> max_members) {
  if (k < 2) throw Error("kary_l2_packing: k must be at least 2");
  if (!(alpha > 0.0)) throw Error("kary_l2_packing: alpha must be positive");
  if (alpha < 1.0 / std::sqrt(double(k)))
    throw Error("kary_l2_packing: alpha < 1/sqrt(k); use the TV packing with the "
                "Cauchy-Schwarz reduction instead");
  const auto l = static_cast<std::size_t>(std::floor(1.0 / (50.0 * alpha * alpha)));
  if (l == 0)
    throw Error("kary_l2_packing: weight floor(1/(50 alpha^2)) is 0 for alpha = " + fmt(alpha));

  PackingFamily family;
  family.kind = "kary-l2";
  family.loss = Loss::L2;
  family.params = {{"k", double(k)}, {"alpha", alpha}, {"l", double(l)}};
  if (l < 20) family.notes.push_back("weight l < 20: code size guarantee waived");
  if (alpha >= 0.1) family.notes.push_back("alpha >= 0.1: outside the construction's range");

  Code code = gv_constant_weight(k, l, max_members);
  for (const auto& word : code.words) {
    std::vector<double> probs(k);
    for (std::size_t i = 0; i < k; ++i) probs[i] = word[i] ? 1.0 / double(l) : 0.0;
    family.members.emplace_back(ProbVector(std::move(probs)));
  }
  family.separation = 1.0 / (2.0 * std::sqrt(double(l)));
  family.tv_cap = 1.0;
  family.codes.push_back(std::move(code));
  return family;
}

PackingFamily product_packing(std::size_t k, std::size_t d, double alpha, bool balanced,
                              std::optional<std::size_t> max_members, std::size_t inner_words) {
  require_even(k, "product_packing");
  if (d < 2) throw Error("product_packing: d must be at least 2");
  if (!(alpha > 0.0 && alpha < 0.1))
    throw Error("product_packing: alpha must lie in (0, 0.1), got " + fmt(alpha));

  PackingFamily family;
  family.kind = "product";
  family.loss = Loss::TV;
  if (k < 40) family.notes.push_back("k < 40: inner code size guarantee waived");

  Code inner = gv_constant_weight(k, k / 2, inner_words);
  if (inner.size() < 2) throw Error("product_packing: inner code has fewer than two words");
  Code outer = gv_qary(static_cast<std::uint32_t>(inner.size()), d, max_members);
  if (outer.size() < 2) throw Error("product_packing: outer code has fewer than two words");

  double shift = alpha / std::sqrt(double(d));
  std::vector<ProbVector> marginals;
  if (balanced) {
    if (1.0 - shift <= 0.0) {
      shift /= 2.0;
      family.notes.push_back("perturbation halved to keep entries positive");
    }
    for (const auto& word : inner.words) {
      std::vector<double> probs(k);
      for (std::size_t i = 0; i < k; ++i) probs[i] = (word[i] ? 1.0 + shift : 1.0 - shift) / double(k);
      marginals.emplace_back(std::move(probs));
    }
  } else {
    family.notes.push_back("literal marginals renormalized");
    for (const auto& word : inner.words) {
      std::vector<double> probs(k);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        probs[i] = (1.0 + (word[i] ? shift : 0.0)) / double(k);
        total += probs[i];
      }
      for (double& p : probs) p /= total;
      marginals.emplace_back(std::move(probs));
    }
  }

  for (const auto& word : outer.words) {
    std::vector<ProbVector> coords;
    coords.reserve(d);
    for (std::size_t i = 0; i < d; ++i) coords.push_back(marginals[word[i]]);
    family.members.emplace_back(ProductDist(std::move(coords)));
  }
  family.params = {{"k", double(k)},
                   {"d", double(d)},
                   {"alpha", alpha},
                   {"balanced", balanced ? 1.0 : 0.0},
                   {"h", double(inner.size())}};
  family.kl_cap = 4.0 * alpha * alpha;
  family.tv_cap = 2.0 * std::sqrt(2.0) * alpha;
  family.notes.push_back("TV separation constant not explicit; measured minimum reported");
  family.codes.push_back(std::move(inner));
  family.codes.push_back(std::move(outer));
  return family;
}

PackingFamily gaussian_mixture_packing(std::size_t k, std::size_t d, double alpha, double R,
                                       const GaussianPackingOptions& options) {
  if (k < 2) throw Error("gaussian_mixture_packing: k must be at least 2");
  if (d < 2) throw Error("gaussian_mixture_packing: d must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("gaussian_mixture_packing: alpha must lie in (0, 1)");

  const double log_term = std::log(8.0 * double(k) / alpha);
  const bool case_a = k <= d;
  const double threshold = case_a ? std::sqrt(64.0 * log_term)
                                  : std::pow(double(k), 1.0 / double(d)) *
                                        std::sqrt(64.0 * double(d) * log_term);
  if (!(R >= threshold))
    throw Error("gaussian_mixture_packing: R = " + fmt(R) + " is below the required " +
                fmt(threshold));

  PackingFamily family;
  family.kind = "gmix";
  family.loss = Loss::TV;

  Code inner = gv_constant_weight(d, d / 2, options.inner_words);
  if (inner.size() < 2) throw Error("gaussian_mixture_packing: inner code has fewer than two words");
  Code outer = gv_qary(static_cast<std::uint32_t>(inner.size()), k, options.max_members);

  std::vector<std::vector<double>> shifts;
  const double scale = alpha / std::sqrt(double(d));
  for (const auto& word : inner.words) {
    std::vector<double> mu(d);
    for (std::size_t j = 0; j < d; ++j) mu[j] = scale * double(word[j]);
    shifts.push_back(std::move(mu));
  }

  std::vector<std::vector<double>> offsets;
  const double r = std::sqrt(16.0 * double(d) * log_term);
  if (case_a) {
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> v(d, 0.0);
      v[j] = R / 2.0;
      offsets.push_back(std::move(v));
    }
  } else {
    // Greedy r-separated points drawn uniformly from the R/3 ball.
    Rng rng(options.seed);
    const double radius = R / 3.0;
    std::size_t attempts = 0;
    while (offsets.size() < k && attempts < options.placement_attempts) {
      ++attempts;
      std::vector<double> v(d);
      for (auto& x : v) x = rng.normal();
      const double scale_to = radius * std::pow(rng.uniform(), 1.0 / double(d)) / l2_norm(v);
      for (auto& x : v) x *= scale_to;
      bool ok = true;
      for (const auto& u : offsets) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) sq += (u[j] - v[j]) * (u[j] - v[j]);
        if (std::sqrt(sq) <= r) {
          ok = false;
          break;
        }
      }
      if (ok) offsets.push_back(std::move(v));
    }
    if (offsets.size() < k)
      throw Error("gaussian_mixture_packing: placed only " + std::to_string(offsets.size()) +
                  " of " + std::to_string(k) + " separated offsets after " +
                  std::to_string(attempts) + " attempts");
  }

  const std::vector<double> weights(k, 1.0 / double(k));
  for (const auto& word : outer.words) {
    std::vector<std::vector<double>> means(k, std::vector<double>(d));
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < d; ++c) means[j][c] = shifts[word[j]][c] + offsets[j][c];
    family.members.emplace_back(GaussianMixtureSpec(weights, std::move(means), R));
  }

  family.params = {{"k", double(k)},
                   {"d", double(d)},
                   {"alpha", alpha},
                   {"R", R},
                   {"case", case_a ? 1.0 : 2.0},
                   {"separation_radius", r},
                   {"h", double(inner.size())}};
  family.kl_cap = 4.0 * alpha * alpha;
  family.tv_cap = 2.0 * std::sqrt(2.0) * alpha;
  family.notes.push_back("TV separation constant not explicit; measured minimum reported");
  family.codes.push_back(std::move(inner));
  family.codes.push_back(std::move(outer));
  return family;
}

double mixture_kl_convexity_bound(const GaussianMixtureSpec& a, const GaussianMixtureSpec& b) {
  if (a.components() != b.components() || a.dim() != b.dim())
    throw Error("mixture_kl_convexity_bound: mixtures differ in shape");
  double total = 0.0;
  for (std::size_t t = 0; t < a.components(); ++t)
    total += gaussian_component_kl(a.means()[t], b.means()[t]);
  return total / double(a.components());
}

VerificationReport verify_family(const PackingFamily& family, const VerifyOptions& options) {
  VerificationReport report;
  report.members = family.members.size();
  if (family.members.size() < 2) throw Error("verify_family: need at least two members");
  std::size_t m = family.members.size();
  if (m > options.member_cap) {
    m = options.member_cap;
    report.exhaustive = false;
    report.notes.push_back("pairwise checks limited to the first " + std::to_string(m) +
                           " members");
  }
  constexpr double kSlack = 1e-12;
  Rng rng(options.seed);

  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      ++report.pairs_checked;
      const auto& x = family.members[a];
      const auto& y = family.members[b];
      if (const auto* p = std::get_if<ProbVector>(&x)) {
        const auto& q = std::get<ProbVector>(y);
        const double sep = loss_distance(*p, q, family.loss);
        const double tv = distance(*p, q, Metric::TV);
        const double kl = std::max(distance(*p, q, Metric::KL), distance(q, *p, Metric::KL));
        report.min_separation = std::min(report.min_separation, sep);
        report.min_tv = std::min(report.min_tv, tv);
        report.max_tv = std::max(report.max_tv, tv);
        report.max_kl = std::max(report.max_kl, kl);
        ++report.tv_pairs_checked;
      } else if (const auto* p = std::get_if<ProductDist>(&x)) {
        const auto& q = std::get<ProductDist>(y);
        const double kl = std::max(kl_divergence(*p, q), kl_divergence(q, *p));
        report.max_kl = std::max(report.max_kl, kl);
        if (report.tv_pairs_checked < options.product_tv_pairs) {
          try {
            const double tv = product_tv_exact(*p, q, options.atom_cap);
            report.min_tv = std::min(report.min_tv, tv);
            report.max_tv = std::max(report.max_tv, tv);
            report.min_separation = std::min(report.min_separation, tv);
            ++report.tv_pairs_checked;
          } catch (const Error&) {
            // Pair too large to enumerate; KL is still checked exactly.
          }
        }
      } else {
        const auto& g = std::get<GaussianMixtureSpec>(x);
        const auto& h = std::get<GaussianMixtureSpec>(y);
        report.max_kl = std::max(report.max_kl, mixture_kl_convexity_bound(g, h));
        if (options.mc_samples > 0) {
          const McEstimate tv = mixture_tv_mc(g, h, options.mc_samples, rng);
          report.min_tv = std::min(report.min_tv, tv.estimate);
          report.max_tv = std::max(report.max_tv, tv.estimate);
          report.min_separation = std::min(report.min_separation, tv.estimate);
          ++report.tv_pairs_checked;
        }
      }
    }
  }

  if (family.separation)
    report.separation_ok = report.min_separation >= *family.separation - kSlack;
  report.kl_ok = report.max_kl <= family.kl_cap + kSlack;
  // Monte Carlo TV estimates are reported, not asserted against the cap.
  const bool tv_exact = !family.members.empty() &&
                        !std::holds_alternative<GaussianMixtureSpec>(family.members.front());
  if (family.tv_cap && tv_exact && report.tv_pairs_checked > 0)
    report.tv_ok = report.max_tv <= *family.tv_cap + kSlack;
  if (report.tv_pairs_checked < report.pairs_checked)
    report.notes.push_back("TV evaluated on " + std::to_string(report.tv_pairs_checked) + " of " +
                           std::to_string(report.pairs_checked) + " pairs");
  return report;
}

HypercubeFamily HypercubeFamily::kary(std::size_t k, double alpha, std::size_t n) {
  if (k % 2 != 0 || k < 2)
    throw Error("assouad_kary_family: k must be even (got " + std::to_string(k) + ")");
  if (!(alpha >= 0.0 && alpha <= 0.1))
    throw Error("assouad_kary_family: alpha must lie in [0, 0.1], got " + fmt(alpha));
  return HypercubeFamily(Kind::Kary, k, k / 2, alpha, 10.0 * alpha / double(k), n);
}

HypercubeFamily HypercubeFamily::bernoulli_product(std::size_t d, double alpha, std::size_t n) {
  if (d < 2) throw Error("assouad_product_family: d must be at least 2");
  if (!(alpha >= 0.0 && alpha < 0.01))
    throw Error("assouad_product_family: alpha must lie in [0, 0.01), got " + fmt(alpha));
  return HypercubeFamily(Kind::BernoulliProduct, d, d, alpha, 2.5 * alpha / double(d), n);
}

void HypercubeFamily::check_signs(std::span<const int> signs) const {
  if (signs.size() != index_dim_)
    throw Error("hypercube: sign vector has length " + std::to_string(signs.size()) +
                ", expected " + std::to_string(index_dim_));
  for (int s : signs)
    if (s != 1 && s != -1) throw Error("hypercube: sign entries must be +1 or -1");
}

ProbVector HypercubeFamily::kary_member(std::span<const int> signs) const {
  if (kind_ != Kind::Kary) throw Error("kary_member: family is not k-ary");
  check_signs(signs);
  const double k = double(size_param_);
  std::vector<double> probs(size_param_);
  for (std::size_t i = 0; i < index_dim_; ++i) {
    probs[2 * i] = (1.0 + 10.0 * signs[i] * alpha_) / k;
    probs[2 * i + 1] = (1.0 - 10.0 * signs[i] * alpha_) / k;
  }
  return ProbVector(std::move(probs));
}

ProductDist HypercubeFamily::product_member(std::span<const int> signs) const {
  if (kind_ != Kind::BernoulliProduct) throw Error("product_member: family is not a product");
  check_signs(signs);
  const double d = double(size_param_);
  std::vector<ProbVector> coords;
  coords.reserve(size_param_);
  for (std::size_t i = 0; i < size_param_; ++i) {
    const double mu = (1.0 + 20.0 * signs[i] * alpha_) / d;
    coords.emplace_back(std::vector<double>{1.0 - mu, mu});
  }
  return ProductDist(std::move(coords));
}

Distribution HypercubeFamily::member(std::span<const int> signs) const {
  if (kind_ == Kind::Kary) return kary_member(signs);
  return product_member(signs);
}

Distribution HypercubeFamily::mixture_marginal(std::size_t i, int sign) const {
  if (i >= index_dim_) throw Error("mixture_marginal: coordinate out of range");
  if (sign != 1 && sign != -1) throw Error("mixture_marginal: sign must be +1 or -1");
  // Averaging over the free signs leaves every other coordinate at its
  // unperturbed value.
  std::vector<int> signs(index_dim_, 1);
  signs[i] = sign;
  if (kind_ == Kind::Kary) {
    const double k = double(size_param_);
    std::vector<double> probs(size_param_, 1.0 / k);
    probs[2 * i] = (1.0 + 10.0 * sign * alpha_) / k;
    probs[2 * i + 1] = (1.0 - 10.0 * sign * alpha_) / k;
    return ProbVector(std::move(probs));
  }
  const double d = double(size_param_);
  std::vector<ProbVector> coords;
  for (std::size_t j = 0; j < size_param_; ++j) {
    const double mu = j == i ? (1.0 + 20.0 * sign * alpha_) / d : 1.0 / d;
    coords.emplace_back(std::vector<double>{1.0 - mu, mu});
  }
  return ProductDist(std::move(coords));
}

std::vector<std::vector<int>> HypercubeFamily::sign_vectors(std::size_t cap) const {
  if (index_dim_ >= 63 || (std::size_t{1} << index_dim_) > cap)
    throw Error("sign_vectors: 2^" + std::to_string(index_dim_) + " members exceed the cap");
  const std::size_t count = std::size_t{1} << index_dim_;
  std::vector<std::vector<int>> out(count, std::vector<int>(index_dim_));
  for (std::size_t m = 0; m < count; ++m)
    for (std::size_t i = 0; i < index_dim_; ++i)
      out[m][i] = ((m >> (index_dim_ - 1 - i)) & 1U) ? 1 : -1;
  return out;
}

HypercubeFamily assouad_kary_family(std::size_t k, double alpha, std::size_t n) {
  return HypercubeFamily::kary(k, alpha, n);
}

HypercubeFamily assouad_product_family(std::size_t d, double alpha, std::size_t n) {
  return HypercubeFamily::bernoulli_product(d, alpha, n);
}

HypercubeReport verify_hypercube(const HypercubeFamily& family, const VerifyOptions& options) {
  HypercubeReport report;
  std::vector<std::vector<int>> signs;
  const std::size_t dim = family.index_dim();
  if (dim < 63 && (std::size_t{1} << dim) <= options.member_cap) {
    signs = family.sign_vectors(options.member_cap);
  } else {
    report.exhaustive = false;
    Rng rng(options.seed);
    signs.resize(options.member_cap, std::vector<int>(dim));
    for (auto& s : signs)
      for (auto& x : s) x = rng.bernoulli(0.5) ? 1 : -1;
  }
  std::size_t pair_budget = family.kind() == HypercubeFamily::Kind::Kary
                                ? std::numeric_limits<std::size_t>::max()
                                : options.product_tv_pairs;
  for (std::size_t a = 0; a < signs.size() && pair_budget > 0; ++a) {
    for (std::size_t b = a + 1; b < signs.size() && pair_budget > 0; ++b) {
      std::size_t dh = 0;
      for (std::size_t i = 0; i < dim; ++i) dh += signs[a][i] != signs[b][i];
      if (dh == 0) continue;
      double tv = 0.0;
      if (family.kind() == HypercubeFamily::Kind::Kary) {
        tv = distance(family.kary_member(signs[a]), family.kary_member(signs[b]), Metric::TV);
      } else {
        tv = product_tv_exact(family.product_member(signs[a]), family.product_member(signs[b]),
                              options.atom_cap);
        --pair_budget;
      }
      const double target = 2.0 * family.tau() * double(dh);
      ++report.pairs_checked;
      if (target > 0.0) report.min_ratio = std::min(report.min_ratio, tv / target);
      report.max_equality_gap = std::max(report.max_equality_gap, std::abs(tv - target));
      if (tv < target - 1e-12) report.decomposition_ok = false;
    }
  }
  if (family.kind() != HypercubeFamily::Kind::Kary && report.pairs_checked > 0 &&
      pair_budget == 0)
    report.exhaustive = false;
  return report;
}

double bernoulli_zero_event_gap(std::size_t d, double alpha, std::size_t s_prime) {
  const double dd = double(d);
  const double m = double(s_prime);
  return std::pow(1.0 - (1.0 - 20.0 * alpha) / dd, m) - std::pow(1.0 - (1.0 + 20.0 * alpha) / dd, m);
}

}  // namespace dpminimax
