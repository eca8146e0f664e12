#include "dpminimax/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dpminimax/parallel.hpp"

namespace dpminimax {

namespace {

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = (acc += weights[i]);
  return cdf;
}

std::vector<double> scaled(std::vector<double> v, double total) {
  for (double& x : v) x /= total;
  return v;
}

class MaximalCoupling final : public CouplingSampler {
 public:
  MaximalCoupling(ProbVector p, ProbVector q, std::size_t n)
      : p_(std::move(p)), q_(std::move(q)), n_(n) {
    const std::size_t k = p_.k();
    std::vector<double> overlap(k), left(k), right(k);
    for (std::size_t s = 0; s < k; ++s) {
      overlap[s] = std::min(p_[s], q_[s]);
      left[s] = std::max(0.0, p_[s] - q_[s]);
      right[s] = std::max(0.0, q_[s] - p_[s]);
    }
    tv_ = distance(p_, q_, Metric::TV);
    const double same = 1.0 - tv_;
    if (same > 0.0) overlap_cdf_ = cumulative(scaled(overlap, pairwise_sum(overlap)));
    if (tv_ > 0.0) {
      left_cdf_ = cumulative(scaled(left, pairwise_sum(left)));
      right_cdf_ = cumulative(scaled(right, pairwise_sum(right)));
    }
  }

  std::string kind() const override { return "maximal"; }
  std::size_t n() const override { return n_; }

  std::pair<Dataset, Dataset> draw(Rng& rng) const override {
    SymbolData x, y;
    x.symbols.resize(n_);
    y.symbols.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      const bool agree = tv_ == 0.0 || (tv_ < 1.0 && rng.uniform() >= tv_);
      if (agree) {
        x.symbols[t] = y.symbols[t] = static_cast<std::uint32_t>(rng.categorical(overlap_cdf_));
      } else {
        x.symbols[t] = static_cast<std::uint32_t>(rng.categorical(left_cdf_));
        y.symbols[t] = static_cast<std::uint32_t>(rng.categorical(right_cdf_));
      }
    }
    return {std::move(x), std::move(y)};
  }

  std::optional<Distribution> record_law(Side side) const override {
    return side == Side::Left ? p_ : q_;
  }
  double expected_hamming() const override { return double(n_) * tv_; }
  double hamming_bound() const override { return double(n_) * tv_; }

 private:
  ProbVector p_, q_;
  std::size_t n_;
  double tv_ = 0.0;
  std::vector<double> overlap_cdf_, left_cdf_, right_cdf_;
};

class KaryFlipCoupling final : public CouplingSampler {
 public:
  KaryFlipCoupling(std::size_t k, double alpha, std::size_t n, std::size_t i)
      : family_(HypercubeFamily::kary(k, alpha, n)), n_(n), i_(i) {
    if (i >= family_.index_dim())
      throw Error("assouad_kary_coupling: coordinate " + std::to_string(i) + " out of range");
    flip_ = 20.0 * alpha / (1.0 + 10.0 * alpha);
  }

  std::string kind() const override { return "assouad-kary"; }
  std::size_t n() const override { return n_; }

  std::pair<Dataset, Dataset> draw(Rng& rng) const override {
    std::vector<int> signs(family_.index_dim());
    for (auto& s : signs) s = rng.bernoulli(0.5) ? 1 : -1;
    signs[i_] = 1;
    const ProbVector p = family_.kary_member(signs);
    SymbolData x = sample_dataset(p, n_, rng);
    SymbolData y = x;
    const auto from = static_cast<std::uint32_t>(2 * i_);
    for (auto& s : y.symbols)
      if (s == from && rng.bernoulli(flip_)) s = from + 1;
    return {Dataset{std::move(x)}, Dataset{std::move(y)}};
  }

  std::optional<Distribution> record_law(Side side) const override {
    return family_.mixture_marginal(i_, side == Side::Left ? 1 : -1);
  }
  double expected_hamming() const override {
    return 20.0 * family_.alpha() * double(n_) / double(family_.size_param());
  }
  double hamming_bound() const override { return expected_hamming(); }

 private:
  HypercubeFamily family_;
  std::size_t n_;
  std::size_t i_;
  double flip_ = 0.0;
};

class ProductFlipCoupling final : public CouplingSampler {
 public:
  ProductFlipCoupling(std::size_t d, double alpha, std::size_t n, std::size_t i)
      : family_(HypercubeFamily::bernoulli_product(d, alpha, n)), n_(n), i_(i) {
    if (i >= d)
      throw Error("product_flip_coupling: coordinate " + std::to_string(i) + " out of range");
    flip_ = 40.0 * alpha / (1.0 + 20.0 * alpha);
  }

  std::string kind() const override { return "assouad-product"; }
  std::size_t n() const override { return n_; }

  std::pair<Dataset, Dataset> draw(Rng& rng) const override {
    const std::size_t d = family_.size_param();
    const double alpha = family_.alpha();
    std::vector<double> means(d);
    for (std::size_t j = 0; j < d; ++j) {
      const int sign = j == i_ ? 1 : (rng.bernoulli(0.5) ? 1 : -1);
      means[j] = (1.0 + 20.0 * sign * alpha) / double(d);
    }
    // Bits are sparse (means near 1/d): jump between ones with geometric gaps.
    RecordData x;
    x.width = d;
    x.values.assign(n_ * d, 0);
    for (std::size_t j = 0; j < d; ++j) {
      if (means[j] <= 0.0) continue;
      if (means[j] >= 1.0) {
        for (std::size_t t = 0; t < n_; ++t) x.values[t * d + j] = 1;
        continue;
      }
      const double log_miss = std::log1p(-means[j]);
      for (double t = std::floor(std::log(rng.uniform_open()) / log_miss); t < double(n_);
           t += 1.0 + std::floor(std::log(rng.uniform_open()) / log_miss))
        x.values[std::size_t(t) * d + j] = 1;
    }
    RecordData y = x;
    for (std::size_t t = 0; t < n_; ++t) {
      auto& bit = y.values[t * d + i_];
      if (bit == 1 && rng.bernoulli(flip_)) bit = 0;
    }
    return {Dataset{std::move(x)}, Dataset{std::move(y)}};
  }

  std::optional<Distribution> record_law(Side side) const override {
    return family_.mixture_marginal(i_, side == Side::Left ? 1 : -1);
  }
  double expected_hamming() const override {
    return 40.0 * family_.alpha() * double(n_) / double(family_.size_param());
  }
  double hamming_bound() const override { return expected_hamming(); }

 private:
  HypercubeFamily family_;
  std::size_t n_;
  std::size_t i_;
  double flip_ = 0.0;
};

/// Symbol counts per record position; a single row for k-ary data.
struct Tally {
  std::size_t width = 1;
  std::size_t k = 0;
  std::vector<std::uint64_t> counts;  // width x k
  std::uint64_t records = 0;

  void add(const Dataset& data) {
    if (const auto* s = std::get_if<SymbolData>(&data)) {
      for (auto v : s->symbols) {
        if (v >= k) throw Error("marginal_check: symbol outside the declared alphabet");
        ++counts[v];
      }
      records += s->symbols.size();
    } else if (const auto* r = std::get_if<RecordData>(&data)) {
      const std::size_t n = r->values.size() / width;
      for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < width; ++j) {
          const auto v = r->values[t * width + j];
          if (v >= k) throw Error("marginal_check: symbol outside the declared alphabet");
          ++counts[j * k + v];
        }
      records += n;
    } else {
      throw Error("marginal_check: continuous datasets are not supported");
    }
  }
};

}  // namespace

std::unique_ptr<CouplingSampler> maximal_coupling_iid(const ProbVector& p, const ProbVector& q,
                                                      std::size_t n) {
  if (p.k() != q.k()) throw Error("maximal_coupling_iid: alphabet sizes differ");
  if (n < 1) throw Error("maximal_coupling_iid: n must be at least 1");
  return std::make_unique<MaximalCoupling>(p, q, n);
}

std::unique_ptr<CouplingSampler> assouad_kary_coupling(std::size_t k, double alpha, std::size_t n,
                                                       std::size_t i) {
  if (n < 1) throw Error("assouad_kary_coupling: n must be at least 1");
  return std::make_unique<KaryFlipCoupling>(k, alpha, n, i);
}

std::unique_ptr<CouplingSampler> product_flip_coupling(std::size_t d, double alpha, std::size_t n,
                                                       std::size_t i) {
  if (n < 1) throw Error("product_flip_coupling: n must be at least 1");
  return std::make_unique<ProductFlipCoupling>(d, alpha, n, i);
}

McEstimate empirical_hamming(const CouplingSampler& sampler, std::size_t trials, Rng& rng,
                             std::size_t threads) {
  if (trials < 100) throw Error("empirical_hamming: need at least 100 trials");
  const std::uint64_t base = rng.next();
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng stream = Rng::derive(base, {t});
    const auto [x, y] = sampler.draw(stream);
    values[t] = double(hamming(x, y));
  });
  return mean_and_stderr(values);
}

double marginal_check(const CouplingSampler& sampler, Side side, std::size_t trials, Rng& rng,
                      std::size_t threads) {
  if (trials < 10000) throw Error("marginal_check: need at least 10^4 trials");
  const auto law = sampler.record_law(side);
  if (!law || std::holds_alternative<GaussianMixtureSpec>(*law))
    throw Error("marginal_check: continuous marginals are not supported");

  Tally proto;
  std::vector<ProbVector> declared;
  if (const auto* p = std::get_if<ProbVector>(&*law)) {
    proto.k = p->k();
    declared.push_back(*p);
  } else {
    const auto& prod = std::get<ProductDist>(*law);
    proto.width = prod.d();
    proto.k = prod.k();
    declared = prod.marginals();
  }
  proto.counts.assign(proto.width * proto.k, 0);

  const std::uint64_t base = rng.next();
  const std::size_t workers = std::min(resolve_threads(threads), trials);
  std::vector<Tally> tallies(workers, proto);
  const std::size_t block = (trials + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::size_t end = std::min(trials, (w + 1) * block);
    for (std::size_t t = w * block; t < end; ++t) {
      Rng stream = Rng::derive(base, {t});
      auto pair = sampler.draw(stream);
      tallies[w].add(side == Side::Left ? pair.first : pair.second);
    }
  });
  Tally total = proto;
  for (const auto& tally : tallies) {
    total.records += tally.records;
    for (std::size_t c = 0; c < total.counts.size(); ++c) total.counts[c] += tally.counts[c];
  }

  double worst = 0.0;
  for (std::size_t j = 0; j < total.width; ++j) {
    std::vector<double> gaps(total.k);
    for (std::size_t s = 0; s < total.k; ++s)
      gaps[s] = std::abs(double(total.counts[j * total.k + s]) / double(total.records) -
                         declared[j][s]);
    worst = std::max(worst, 0.5 * pairwise_sum(gaps));
  }
  return worst;
}

}  // namespace dpminimax
