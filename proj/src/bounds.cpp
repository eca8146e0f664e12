#include "dpminimax/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpminimax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// exp(-10 eps D), with D = 0 giving 1 even for infinite eps.
double privacy_decay(double epsilon, double D) {
  if (D == 0.0) return 1.0;
  return std::exp(-10.0 * epsilon * D);
}

/// max(0, 0.9 exp(-10 eps D) - 10 D delta)
double hamming_term(double epsilon, double delta, double D) {
  const double slack = D == 0.0 ? 0.0 : 10.0 * D * delta;
  return std::max(0.0, 0.9 * privacy_decay(epsilon, D) - slack);
}

BoundReport finish(std::vector<std::pair<std::string, double>> terms) {
  BoundReport r;
  r.terms = std::move(terms);
  r.value = 0.0;
  r.binding_term = r.terms.front().first;
  for (auto& [name, value] : r.terms) {
    value = std::max(0.0, value);
    if (value > r.value) {
      r.value = value;
      r.binding_term = name;
    }
  }
  return r;
}

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw Error(std::string(what) + " must be nonnegative");
}

/// Largest integer n >= 0 with holds(n), given that holds is true at 0,
/// decreasing in n, and that `estimate` is close to the crossing point.
template <typename Pred>
std::uint64_t last_true(double estimate, Pred holds) {
  if (!holds(0)) return 0;
  double guess = std::ceil(estimate) - 1.0;
  if (!(guess >= 0.0)) guess = 0.0;
  if (guess > 9.0e18) throw Error("threshold exceeds the representable range");
  std::uint64_t n = static_cast<std::uint64_t>(guess);
  while (n > 0 && !holds(n)) --n;
  while (holds(n + 1)) ++n;
  return n;
}

}  // namespace

double BoundReport::term(const std::string& name) const {
  for (const auto& [key, value] : terms)
    if (key == name) return value;
  throw Error("BoundReport: no term named " + name);
}

BoundReport le_cam_bound(double tv, double D, const PrivacyBudget& budget) {
  if (!(tv >= 0.0 && tv <= 1.0)) throw Error("le_cam_bound: tv must lie in [0, 1]");
  require_nonnegative(D, "le_cam_bound: D");
  return finish({{"statistical", 0.5 * (1.0 - tv)},
                 {"privacy", 0.5 * hamming_term(budget.epsilon, budget.delta, D)}});
}

BoundReport fano_bound(double alpha, double beta, double D, double M, double epsilon) {
  if (!(M >= 2.0)) throw Error("fano_bound: M must be at least 2");
  require_nonnegative(alpha, "fano_bound: alpha");
  require_nonnegative(beta, "fano_bound: beta");
  require_nonnegative(D, "fano_bound: D");
  require_nonnegative(epsilon, "fano_bound: epsilon");
  const double log_m = std::log(M);
  const double statistical = alpha / 2.0 * (1.0 - (beta + std::log(2.0)) / log_m);
  const double exponent = D == 0.0 ? log_m : log_m - 10.0 * epsilon * D;
  const double privacy = 0.4 * alpha * std::min(1.0, std::exp(std::min(0.0, exponent)));
  return finish({{"statistical", statistical}, {"privacy", privacy}});
}

BoundReport assouad_bound(std::size_t k_index, double tau, double D, const PrivacyBudget& budget) {
  if (k_index < 1) throw Error("assouad_bound: k_index must be at least 1");
  require_nonnegative(tau, "assouad_bound: tau");
  require_nonnegative(D, "assouad_bound: D");
  return finish(
      {{"privacy", double(k_index) * tau / 2.0 * hamming_term(budget.epsilon, budget.delta, D)}});
}

double fano_classical_term(double beta, double M, double tau, std::uint64_t n) {
  return 1.5 * tau * (1.0 - (double(n) * beta + std::log(2.0)) / std::log(M));
}

double fano_private_term(double gamma, double M, double epsilon, double tau, std::uint64_t n) {
  if (n == 0) return 1.2 * tau;
  if (std::isinf(epsilon)) return 0.0;
  const double exponent = std::log(M) - 10.0 * epsilon * double(n) * gamma;
  return 1.2 * tau * std::exp(std::min(0.0, exponent));
}

SampleThresholds fano_sample_complexity(double alpha_sep, double beta, double gamma, double M,
                                        double epsilon, double tau) {
  if (!(M >= 2.0)) throw Error("fano_sample_complexity: M must be at least 2");
  if (!(tau > 0.0)) throw Error("fano_sample_complexity: tau must be positive");
  if (!(alpha_sep >= 3.0 * tau))
    throw Error("fano_sample_complexity: separation must be at least 3 tau");
  if (!(beta > 0.0) || !(gamma > 0.0))
    throw Error("fano_sample_complexity: beta and gamma must be positive");
  if (!(epsilon > 0.0)) throw Error("fano_sample_complexity: epsilon must be positive");

  SampleThresholds out;
  const double log_m = std::log(M);
  if (log_m > std::log(2.0)) {
    const double estimate = (log_m / 3.0 - std::log(2.0)) / beta;
    out.n_classical = last_true(estimate, [&](std::uint64_t n) {
      return fano_classical_term(beta, M, tau, n) > tau;
    });
  }
  if (!std::isinf(epsilon)) {
    const double estimate = (log_m - std::log(5.0 / 6.0)) / (10.0 * epsilon * gamma);
    out.n_private = last_true(estimate, [&](std::uint64_t n) {
      return fano_private_term(gamma, M, epsilon, tau, n) > tau;
    });
  }
  return out;
}

double packing_bound(double M, double d) {
  if (!(M >= 2.0)) throw Error("packing_bound: M must be at least 2");
  if (!(d > 0.0)) throw Error("packing_bound: d must be positive");
  return std::log(M) / d;
}

GroupFactor group_privacy_factor(const PrivacyBudget& budget, std::uint64_t t) {
  if (t == 0) return {1.0, 0.0};
  const double eps = budget.epsilon;
  const double growth = t == 1 ? 1.0 : std::exp(eps * double(t - 1));
  return {std::exp(eps * double(t)), budget.delta * double(t) * growth};
}

Problem parse_problem(const std::string& name) {
  if (name == "kary_tv" || name == "kary-tv") return Problem::KaryTV;
  if (name == "kary_l2" || name == "kary-l2") return Problem::KaryL2;
  if (name == "product") return Problem::Product;
  if (name == "gmix") return Problem::GaussianMixture;
  throw Error("unknown problem '" + name + "' (expected kary_tv, kary_l2, product, gmix)");
}

std::string to_string(Problem problem) {
  switch (problem) {
    case Problem::KaryTV: return "kary_tv";
    case Problem::KaryL2: return "kary_l2";
    case Problem::Product: return "product";
    case Problem::GaussianMixture: return "gmix";
  }
  return "unknown";
}

std::vector<TableRow> sample_complexity_table(Problem problem, const ProblemParams& params,
                                              const PrivacyBudget& budget) {
  const double a = params.alpha;
  const double k = double(params.k);
  const double d = double(params.d);
  const double eps = budget.epsilon;
  const double del = budget.delta;
  if (!(a > 0.0)) throw Error("sample_complexity_table: alpha must be positive");
  if (!(eps > 0.0)) throw Error("sample_complexity_table: epsilon must be positive");
  if (params.k < 2) throw Error("sample_complexity_table: k must be at least 2");

  const bool pure = del == 0.0;
  const std::string privacy = pure ? "pure" : "approximate";
  std::vector<TableRow> rows;
  auto add = [&](std::string side, std::string expr, std::string source, double value) {
    rows.push_back({to_string(problem), std::move(side), privacy, std::move(expr),
                    std::move(source), value, true});
  };

  switch (problem) {
    case Problem::KaryTV:
      add("upper", "k/a^2 + k/(a eps)", "Laplace histogram with simplex projection",
          k / (a * a) + k / (a * eps));
      if (pure)
        add("lower", "k/a^2 + k/(a eps)", "private Fano over a constant-weight code packing",
            k / (a * a) + k / (a * eps));
      else
        add("lower", "k/a^2 + k/(a (eps + delta))", "private Assouad over the k-ary hypercube",
            k / (a * a) + k / (a * (eps + del)));
      break;
    case Problem::KaryL2: {
      const bool small = a < 1.0 / std::sqrt(k);
      const double base = 1.0 / (a * a);
      if (pure) {
        if (small) {
          add("upper", "1/a^2 + sqrt(k)/(a eps)", "Laplace histogram with simplex projection",
              base + std::sqrt(k) / (a * eps));
          add("lower", "1/a^2 + sqrt(k)/(a eps)", "private Assouad over the k-ary hypercube",
              base + std::sqrt(k) / (a * eps));
        } else {
          add("upper", "1/a^2 + log(k)/(a^2 eps)", "Laplace histogram with simplex projection",
              base + std::log(k) / (a * a * eps));
          add("lower", "1/a^2 + log(k a^2)/(a^2 eps)",
              "private Fano over a sparse constant-weight packing",
              base + std::log(k * a * a) / (a * a * eps));
        }
      } else {
        add("upper", small ? "1/a^2 + sqrt(k)/(a eps)" : "1/a^2 + log(k)/(a^2 eps)",
            "Laplace histogram with simplex projection",
            small ? base + std::sqrt(k) / (a * eps) : base + std::log(k) / (a * a * eps));
        add("lower", small ? "1/a^2 + sqrt(k)/(a (eps + delta))" : "1/a^2 + 1/(a^2 (eps + delta))",
            "private Assouad over the k-ary hypercube",
            small ? base + std::sqrt(k) / (a * (eps + del)) : base + 1.0 / (a * a * (eps + del)));
      }
      break;
    }
    case Problem::Product:
      if (pure) {
        add("upper", "k d log(k d / a) (1/a^2 + 1/(a eps))", "private product estimator",
            k * d * std::log(k * d / a) * (1.0 / (a * a) + 1.0 / (a * eps)));
        add("lower", "k d (1/a^2 + 1/(a eps))", "private Fano over a two-level code packing",
            k * d * (1.0 / (a * a) + 1.0 / (a * eps)));
      } else {
        if (params.k != 2)
          throw Error("sample_complexity_table: approximate-DP product bounds need k = 2");
        add("upper", "d log(d / a) (1/a^2 + 1/(a eps))", "private product estimator",
            d * std::log(d / a) * (1.0 / (a * a) + 1.0 / (a * eps)));
        add("lower", "d/a^2 + d/(a (eps + delta))", "private Assouad over Bernoulli products",
            d / (a * a) + d / (a * (eps + del)));
      }
      break;
    case Problem::GaussianMixture:
      if (!pure)
        throw Error("sample_complexity_table: no approximate-DP bounds for Gaussian mixtures");
      if (!(params.R > 0.0)) throw Error("sample_complexity_table: R must be positive");
      add("upper", "k d log(d R / a) (1/a^2 + 1/(a eps))", "private mixture learner",
          k * d * std::log(d * params.R / a) * (1.0 / (a * a) + 1.0 / (a * eps)));
      add("lower", "k d (1/a^2 + 1/(a eps))", "private Fano over a mixture packing",
          k * d * (1.0 / (a * a) + 1.0 / (a * eps)));
      break;
  }
  return rows;
}

}  // namespace dpminimax
