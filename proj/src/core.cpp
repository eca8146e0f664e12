#include "dpminimax/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dpminimax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> running_sum(std::span<const double> values) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    out[i] = acc;
  }
  return out;
}

void normalize_in_place(std::vector<double>& values, const char* what) {
  if (values.empty()) throw Error(std::string(what) + ": empty probability vector");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0)
      throw Error(std::string(what) + ": entries must be finite and nonnegative");
  }
  const double total = pairwise_sum(values);
  const double gap = std::abs(total - 1.0);
  if (gap > ProbVector::kRenormalizeTolerance)
    throw Error(std::string(what) + ": entries sum to " + std::to_string(total) +
                ", not 1");
  if (gap > ProbVector::kSumTolerance)
    for (double& v : values) v /= total;
}

}  // namespace

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  normalize_in_place(probs_, "ProbVector");
  cdf_ = running_sum(probs_);
}

ProbVector ProbVector::uniform(std::size_t k) {
  if (k == 0) throw Error("ProbVector::uniform: k must be positive");
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ProbVector ProbVector::point_mass(std::size_t k, std::size_t symbol) {
  if (symbol >= k) throw Error("ProbVector::point_mass: symbol out of range");
  std::vector<double> probs(k, 0.0);
  probs[symbol] = 1.0;
  return ProbVector(std::move(probs));
}

ProductDist::ProductDist(std::vector<ProbVector> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw Error("ProductDist: need at least one marginal");
  const std::size_t k = marginals_.front().k();
  for (const auto& m : marginals_)
    if (m.k() != k) throw Error("ProductDist: marginals must share the alphabet size");
}

GaussianMixtureSpec::GaussianMixtureSpec(std::vector<double> weights,
                                         std::vector<std::vector<double>> means,
                                         double norm_bound)
    : weights_(std::move(weights)), means_(std::move(means)), norm_bound_(norm_bound) {
  normalize_in_place(weights_, "GaussianMixtureSpec");
  if (means_.size() != weights_.size())
    throw Error("GaussianMixtureSpec: one mean per weight required");
  if (!(norm_bound_ >= 0.0)) throw Error("GaussianMixtureSpec: R must be nonnegative");
  const std::size_t d = means_.front().size();
  if (d == 0) throw Error("GaussianMixtureSpec: means must have positive dimension");
  for (const auto& mu : means_) {
    if (mu.size() != d) throw Error("GaussianMixtureSpec: means differ in dimension");
    double sq = 0.0;
    for (double x : mu) {
      if (!std::isfinite(x)) throw Error("GaussianMixtureSpec: non-finite mean");
      sq += x * x;
    }
    if (std::sqrt(sq) > norm_bound_ * (1.0 + 1e-12))
      throw Error("GaussianMixtureSpec: mean norm " + std::to_string(std::sqrt(sq)) +
                  " exceeds R = " + std::to_string(norm_bound_));
  }
  weight_cdf_ = running_sum(weights_);
}

double GaussianMixtureSpec::log_density(std::span<const double> z) const {
  if (z.size() != dim()) throw Error("log_density: dimension mismatch");
  const double log_norm = -0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
  double peak = -kInf;
  std::vector<double> terms(components());
  for (std::size_t c = 0; c < components(); ++c) {
    if (weights_[c] == 0.0) {
      terms[c] = -kInf;
      continue;
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = z[j] - means_[c][j];
      sq += diff * diff;
    }
    terms[c] = std::log(weights_[c]) + log_norm - 0.5 * sq;
    peak = std::max(peak, terms[c]);
  }
  if (peak == -kInf) return -kInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

PrivacyBudget::PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
  if (!(epsilon >= 0.0)) throw Error("PrivacyBudget: epsilon must be >= 0");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error("PrivacyBudget: delta must lie in [0, 1]");
}

std::size_t dataset_size(const Dataset& data) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SymbolData>) {
          return d.symbols.size();
        } else if constexpr (std::is_same_v<T, RecordData>) {
          return d.width == 0 ? 0 : d.values.size() / d.width;
        } else {
          return d.dim == 0 ? 0 : d.coords.size() / d.dim;
        }
      },
      data);
}

std::size_t hamming(const Dataset& x, const Dataset& y) {
  if (x.index() != y.index()) throw Error("hamming: datasets of different kinds");
  const std::size_t n = dataset_size(x);
  if (n != dataset_size(y)) throw Error("hamming: datasets of different lengths");
  std::size_t count = 0;
  if (const auto* sx = std::get_if<SymbolData>(&x)) {
    const auto& sy = std::get<SymbolData>(y);
    for (std::size_t t = 0; t < n; ++t) count += sx->symbols[t] != sy.symbols[t];
  } else if (const auto* rx = std::get_if<RecordData>(&x)) {
    const auto& ry = std::get<RecordData>(y);
    if (rx->width != ry.width) throw Error("hamming: record widths differ");
    for (std::size_t t = 0; t < n; ++t) {
      auto a = rx->record(t);
      auto b = ry.record(t);
      count += !std::equal(a.begin(), a.end(), b.begin());
    }
  } else {
    const auto& px = std::get<PointData>(x);
    const auto& py = std::get<PointData>(y);
    if (px.dim != py.dim) throw Error("hamming: point dimensions differ");
    for (std::size_t t = 0; t < n; ++t) {
      auto a = px.coords.begin() + static_cast<std::ptrdiff_t>(t * px.dim);
      auto b = py.coords.begin() + static_cast<std::ptrdiff_t>(t * py.dim);
      count += !std::equal(a, a + static_cast<std::ptrdiff_t>(px.dim), b);
    }
  }
  return count;
}

double distance(const ProbVector& p, const ProbVector& q, Metric metric) {
  if (p.k() != q.k())
    throw Error("distance: alphabet sizes differ (" + std::to_string(p.k()) + " vs " +
                std::to_string(q.k()) + ")");
  const std::size_t k = p.k();
  std::vector<double> terms(k);
  switch (metric) {
    case Metric::TV:
    case Metric::L1:
      for (std::size_t i = 0; i < k; ++i) terms[i] = std::abs(p[i] - q[i]);
      return metric == Metric::TV ? 0.5 * pairwise_sum(terms) : pairwise_sum(terms);
    case Metric::L2:
      for (std::size_t i = 0; i < k; ++i) terms[i] = (p[i] - q[i]) * (p[i] - q[i]);
      return std::sqrt(pairwise_sum(terms));
    case Metric::KL:
      for (std::size_t i = 0; i < k; ++i) {
        if (p[i] == 0.0) {
          terms[i] = 0.0;
        } else if (q[i] == 0.0) {
          return kInf;
        } else {
          terms[i] = p[i] * std::log(p[i] / q[i]);
        }
      }
      // Rounding can leave a tiny negative total for near-identical inputs.
      return std::max(0.0, pairwise_sum(terms));
    case Metric::Chi2:
      for (std::size_t i = 0; i < k; ++i) {
        const double diff = p[i] - q[i];
        if (q[i] == 0.0) {
          if (diff != 0.0) return kInf;
          terms[i] = 0.0;
        } else {
          terms[i] = diff * diff / q[i];
        }
      }
      return pairwise_sum(terms);
  }
  throw Error("distance: unknown metric");
}

double kl_divergence(const ProductDist& p, const ProductDist& q) {
  if (p.d() != q.d() || p.k() != q.k()) throw Error("kl_divergence: shape mismatch");
  std::vector<double> terms(p.d());
  for (std::size_t i = 0; i < p.d(); ++i)
    terms[i] = distance(p.marginal(i), q.marginal(i), Metric::KL);
  return pairwise_sum(terms);
}

double product_tv_exact(const ProductDist& p, const ProductDist& q, std::size_t atom_cap) {
  if (p.d() != q.d() || p.k() != q.k()) throw Error("product_tv_exact: shape mismatch");
  std::vector<std::size_t> differing;
  for (std::size_t i = 0; i < p.d(); ++i)
    if (!(p.marginal(i) == q.marginal(i))) differing.push_back(i);
  if (differing.empty()) return 0.0;

  const std::size_t k = p.k();
  std::size_t atoms = 1;
  for (std::size_t j = 0; j < differing.size(); ++j) {
    if (atoms > atom_cap / k)
      throw Error("product_tv_exact: " + std::to_string(differing.size()) +
                  " differing coordinates over k=" + std::to_string(k) +
                  " exceed the atom cap");
    atoms *= k;
  }

  // Mixed-radix walk over the differing coordinates; partial products are
  // cached per level so each step costs O(1) amortized.
  const std::size_t m = differing.size();
  std::vector<std::size_t> digit(m, 0);
  std::vector<double> pp(m + 1, 1.0), qp(m + 1, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    pp[j + 1] = pp[j] * p.marginal(differing[j])[0];
    qp[j + 1] = qp[j] * q.marginal(differing[j])[0];
  }
  double total = 0.0;
  double compensation = 0.0;
  for (std::size_t a = 0; a < atoms; ++a) {
    const double term = std::abs(pp[m] - qp[m]) - compensation;
    const double next = total + term;
    compensation = (next - total) - term;
    total = next;

    std::size_t level = m;
    while (level > 0) {
      --level;
      if (++digit[level] < k) break;
      digit[level] = 0;
    }
    for (std::size_t j = level; j < m; ++j) {
      pp[j + 1] = pp[j] * p.marginal(differing[j])[digit[j]];
      qp[j + 1] = qp[j] * q.marginal(differing[j])[digit[j]];
    }
  }
  return 0.5 * total;
}

double gaussian_component_kl(std::span<const double> mu1, std::span<const double> mu2) {
  if (mu1.size() != mu2.size()) throw Error("gaussian_component_kl: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) sq += (mu1[i] - mu2[i]) * (mu1[i] - mu2[i]);
  return 0.5 * sq;
}

namespace {

void draw_gaussian_point(const GaussianMixtureSpec& m, Rng& rng, std::span<double> out) {
  const std::size_t c = rng.categorical(m.weight_cdf());
  const auto& mu = m.means()[c];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = mu[j] + rng.normal();
}

}  // namespace

McEstimate mixture_tv_mc(const GaussianMixtureSpec& m1, const GaussianMixtureSpec& m2,
                         std::size_t samples, Rng& rng) {
  if (m1.dim() != m2.dim()) throw Error("mixture_tv_mc: dimension mismatch");
  if (samples < 1000) throw Error("mixture_tv_mc: need at least 1000 samples");
  std::vector<double> values(samples);
  std::vector<double> z(m1.dim());
  for (std::size_t s = 0; s < samples; ++s) {
    draw_gaussian_point(rng.bernoulli(0.5) ? m1 : m2, rng, z);
    const double l1 = m1.log_density(z);
    const double l2 = m2.log_density(z);
    if (!std::isfinite(l1) && !std::isfinite(l2))
      throw Error("mixture_tv_mc: both densities underflow at sample " + std::to_string(s));
    if (std::isnan(l1) || std::isnan(l2))
      throw Error("mixture_tv_mc: density evaluation failed at sample " + std::to_string(s));
    // |m1 - m2| / (m1 + m2) = |tanh((log m1 - log m2) / 2)|
    values[s] = (std::isinf(l1) || std::isinf(l2)) ? 1.0 : std::abs(std::tanh(0.5 * (l1 - l2)));
  }
  return mean_and_stderr(values);
}

SymbolData sample_dataset(const ProbVector& dist, std::size_t n, Rng& rng) {
  SymbolData out;
  out.symbols.resize(n);
  for (auto& s : out.symbols) s = static_cast<std::uint32_t>(rng.categorical(dist.cdf()));
  return out;
}

RecordData sample_dataset(const ProductDist& dist, std::size_t n, Rng& rng) {
  RecordData out;
  out.width = dist.d();
  out.values.resize(n * dist.d());
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < dist.d(); ++i)
      out.values[t * dist.d() + i] =
          static_cast<std::uint32_t>(rng.categorical(dist.marginal(i).cdf()));
  return out;
}

PointData sample_dataset(const GaussianMixtureSpec& dist, std::size_t n, Rng& rng) {
  PointData out;
  out.dim = dist.dim();
  out.coords.resize(n * dist.dim());
  for (std::size_t t = 0; t < n; ++t)
    draw_gaussian_point(dist, rng, std::span<double>(out.coords).subspan(t * out.dim, out.dim));
  return out;
}

Dataset sample_dataset(const Distribution& dist, std::size_t n, Rng& rng) {
  return std::visit([&](const auto& d) -> Dataset { return sample_dataset(d, n, rng); }, dist);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

McEstimate mean_and_stderr(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  if (values.size() < 2) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace dpminimax
