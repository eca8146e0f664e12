#include "dpminimax/mechanisms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "dpminimax/parallel.hpp"

namespace dpminimax {

namespace {

std::size_t distance_between(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

/// Likelihood ratios within this relative distance of the factor count as
/// equal, so rounding in the tabulated rows does not register as leakage.
constexpr double kRatioTolerance = 1e-12;

/// sum_o max(0, P(o|x) - factor * P(o|y)), with an infinite factor
/// only charging outputs that y never produces.
double hockey_stick(const std::vector<double>& px, const std::vector<double>& py, double factor) {
  std::vector<double> terms(px.size());
  for (std::size_t o = 0; o < px.size(); ++o) {
    if (py[o] == 0.0) {
      terms[o] = px[o];
    } else if (std::isinf(factor)) {
      terms[o] = 0.0;
    } else {
      const double excess = px[o] - factor * py[o];
      terms[o] = excess > kRatioTolerance * px[o] ? excess : 0.0;
    }
  }
  return pairwise_sum(terms);
}

/// max over ordered pairs (x, y) with 1 <= d_H(x, y) <= max_dist of the hockey-stick divergence.
double worst_pair(const FiniteMechanism& mech, double factor, std::size_t max_dist,
                  std::size_t threads) {
  const std::size_t m = mech.datasets.size();
  std::vector<double> row_worst(m, 0.0);
  parallel_for(m, threads, [&](std::size_t x) {
    double worst = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      if (x == y || mech.datasets[x].size() != mech.datasets[y].size()) continue;
      const std::size_t d = distance_between(mech.datasets[x], mech.datasets[y]);
      if (d < 1 || d > max_dist) continue;
      worst = std::max(worst, hockey_stick(mech.table[x], mech.table[y], factor));
    }
    row_worst[x] = worst;
  });
  return m == 0 ? 0.0 : *std::max_element(row_worst.begin(), row_worst.end());
}

double laplace_scale(std::size_t n, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("laplace_estimator: epsilon must be positive");
  return std::isinf(epsilon) ? 0.0 : 2.0 / (double(n) * epsilon);
}

std::vector<double> frequencies(std::span<const std::uint32_t> symbols, std::size_t k) {
  if (symbols.empty()) throw Error("estimator: empty dataset");
  if (k == 0) throw Error("estimator: k must be positive");
  std::vector<std::uint64_t> counts(k, 0);
  for (auto s : symbols) {
    if (s >= k)
      throw Error("estimator: symbol " + std::to_string(s) + " outside [0, " + std::to_string(k) +
                  ")");
    ++counts[s];
  }
  std::vector<double> freq(k);
  for (std::size_t i = 0; i < k; ++i) freq[i] = double(counts[i]) / double(symbols.size());
  return freq;
}

const SymbolData& symbols_of(const Dataset& data) {
  const auto* s = std::get_if<SymbolData>(&data);
  if (!s) throw Error("estimator: expected a k-ary symbol dataset");
  return *s;
}

}  // namespace

void FiniteMechanism::validate() const {
  if (datasets.empty()) throw Error("FiniteMechanism: no datasets");
  if (outputs.empty()) throw Error("FiniteMechanism: no outputs");
  if (table.size() != datasets.size())
    throw Error("FiniteMechanism: table needs one row per dataset");
  for (std::size_t x = 0; x < table.size(); ++x) {
    if (table[x].size() != outputs.size())
      throw Error("FiniteMechanism: row " + std::to_string(x) + " needs one entry per output");
    double total = 0.0;
    for (double p : table[x]) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw Error("FiniteMechanism: row " + std::to_string(x) + " has a negative entry");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error("FiniteMechanism: row " + std::to_string(x) + " sums to " +
                  std::to_string(total));
  }
}

std::size_t FiniteMechanism::index_of(std::span<const std::int64_t> dataset) const {
  for (std::size_t i = 0; i < datasets.size(); ++i)
    if (std::equal(datasets[i].begin(), datasets[i].end(), dataset.begin(), dataset.end()))
      return i;
  std::string shown;
  for (auto v : dataset) shown += (shown.empty() ? "" : ",") + std::to_string(v);
  throw Error("FiniteMechanism: dataset [" + shown + "] is not tabulated");
}

double check_dp(const FiniteMechanism& mech, double epsilon, const NeighborRelation& relation,
                std::size_t threads) {
  if (!(epsilon >= 0.0)) throw Error("check_dp: epsilon must be nonnegative");
  mech.validate();
  const double factor = std::exp(epsilon);
  if (relation.pairs.empty()) return worst_pair(mech, factor, 1, threads);
  double worst = 0.0;
  for (const auto& [x, y] : relation.pairs) {
    const std::size_t ix = mech.index_of(x), iy = mech.index_of(y);
    worst = std::max(worst, hockey_stick(mech.table[ix], mech.table[iy], factor));
  }
  return worst;
}

double group_dp_check(const FiniteMechanism& mech, double epsilon, double delta, std::size_t t,
                      std::size_t threads) {
  if (t < 1) throw Error("group_dp_check: t must be at least 1");
  if (!(epsilon >= 0.0)) throw Error("group_dp_check: epsilon must be nonnegative");
  mech.validate();
  const double factor = std::exp(double(t) * epsilon);
  const double slack = delta * double(t) * (t == 1 ? 1.0 : std::exp(epsilon * double(t - 1)));
  return worst_pair(mech, factor, t, threads) - slack;
}

FiniteMechanism randomized_response(std::size_t n_bits, double epsilon) {
  if (n_bits < 1 || n_bits > 10) throw Error("randomized_response: n_bits must lie in [1, 10]");
  if (!(epsilon >= 0.0)) throw Error("randomized_response: epsilon must be nonnegative");
  const double flip = 1.0 / (1.0 + std::exp(epsilon));
  const std::size_t count = std::size_t{1} << n_bits;
  FiniteMechanism mech;
  for (std::size_t v = 0; v < count; ++v) {
    std::vector<std::int64_t> bits(n_bits);
    std::string label;
    for (std::size_t b = 0; b < n_bits; ++b) {
      bits[b] = (v >> (n_bits - 1 - b)) & 1U;
      label += char('0' + bits[b]);
    }
    mech.datasets.push_back(std::move(bits));
    mech.outputs.push_back(std::move(label));
  }
  mech.table.assign(count, std::vector<double>(count));
  for (std::size_t x = 0; x < count; ++x)
    for (std::size_t o = 0; o < count; ++o) {
      const int flips = std::popcount(x ^ o);
      mech.table[x][o] = std::pow(flip, flips) * std::pow(1.0 - flip, int(n_bits) - flips);
    }
  return mech;
}

ProbVector project_simplex(std::span<const double> v) {
  if (v.empty()) throw Error("project_simplex: empty input");
  for (double x : v)
    if (!std::isfinite(x)) throw Error("project_simplex: non-finite entry");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - 1.0) / double(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::max(0.0, v[i] - theta);
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return ProbVector(std::move(w));
}

double kkt_residual(std::span<const double> v, std::span<const double> w) {
  if (v.size() != w.size()) throw Error("kkt_residual: length mismatch");
  double shift = 0.0, total = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += w[i];
    if (w[i] > 0.0) {
      shift += v[i] - w[i];
      ++support;
    }
  }
  if (support == 0) return std::numeric_limits<double>::infinity();
  shift /= double(support);
  double residual = std::abs(total - 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w[i] < 0.0) residual = std::max(residual, -w[i]);
    if (w[i] > 0.0)
      residual = std::max(residual, std::abs(v[i] - w[i] - shift));
    else
      residual = std::max(residual, v[i] - shift);
  }
  return residual;
}

ProbVector empirical_estimator(const Dataset& data, std::size_t k) {
  return ProbVector(frequencies(symbols_of(data).symbols, k));
}

ProbVector laplace_estimator(const Dataset& data, std::size_t k, double epsilon, Rng& rng) {
  const auto& symbols = symbols_of(data).symbols;
  const double scale = laplace_scale(symbols.size(), epsilon);
  std::vector<double> h = frequencies(symbols, k);
  for (double& x : h) x += rng.laplace(scale);
  return project_simplex(h);
}

ProbVector laplace_estimator_with_noise(std::span<const std::uint32_t> symbols, std::size_t k,
                                        double epsilon, std::span<const double> unit_noise) {
  if (unit_noise.size() != k) throw Error("laplace_estimator: need one noise draw per symbol");
  const double scale = laplace_scale(symbols.size(), epsilon);
  std::vector<double> h = frequencies(symbols, k);
  for (std::size_t i = 0; i < k; ++i) h[i] += scale * unit_noise[i];
  return project_simplex(h);
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "empirical") return EstimatorKind::Empirical;
  if (name == "laplace") return EstimatorKind::Laplace;
  throw Error("unknown estimator '" + name + "' (expected empirical or laplace)");
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Empirical ? "empirical" : "laplace";
}

void EstimatorConfig::validate() const {
  if (k < 1) throw Error("EstimatorConfig: k must be positive");
  if (kind == EstimatorKind::Laplace && !(budget.epsilon > 0.0))
    throw Error("EstimatorConfig: the Laplace estimator requires epsilon > 0");
}

FiniteMechanism tabulate_laplace_estimator(std::size_t n, double epsilon, std::size_t cells,
                                           std::size_t samples, Rng& rng, std::size_t threads) {
  if (n < 1 || n > 16) throw Error("tabulate_laplace_estimator: n must lie in [1, 16]");
  if (cells < 1) throw Error("tabulate_laplace_estimator: need at least one cell");
  if (samples < 1) throw Error("tabulate_laplace_estimator: need at least one sample");
  FiniteMechanism mech;
  const std::size_t count = std::size_t{1} << n;
  for (std::size_t v = 0; v < count; ++v) {
    std::vector<std::int64_t> data(n);
    for (std::size_t b = 0; b < n; ++b) data[b] = (v >> (n - 1 - b)) & 1U;
    mech.datasets.push_back(std::move(data));
  }
  for (std::size_t c = 0; c < cells; ++c) mech.outputs.push_back("cell" + std::to_string(c));
  mech.table.assign(count, std::vector<double>(cells, 0.0));
  const std::uint64_t base = rng.next();
  parallel_for(count, threads, [&](std::size_t x) {
    Rng stream = Rng::derive(base, {x});
    SymbolData data;
    for (auto s : mech.datasets[x]) data.symbols.push_back(static_cast<std::uint32_t>(s));
    const Dataset wrapped{data};
    std::vector<std::uint64_t> hits(cells, 0);
    for (std::size_t s = 0; s < samples; ++s) {
      const double w0 = laplace_estimator(wrapped, 2, epsilon, stream)[0];
      const auto cell = std::min(cells - 1, static_cast<std::size_t>(w0 * double(cells)));
      ++hits[cell];
    }
    for (std::size_t c = 0; c < cells; ++c) mech.table[x][c] = double(hits[c]) / double(samples);
  });
  return mech;
}

}  // namespace dpminimax
