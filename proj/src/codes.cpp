#include "dpminimax/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "dpminimax/core.hpp"
#include "dpminimax/random.hpp"

namespace dpminimax {

namespace {

using Mask = std::vector<std::uint64_t>;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t mask_distance(const Mask& a, const Mask& b) {
  std::size_t dist = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dist += std::popcount(a[i] ^ b[i]);
  return dist;
}

/// Greedy acceptance against already accepted words, newest first: in
/// lexicographic order a rejected candidate is usually close to a recent word.
template <typename Word, typename Dist>
bool far_from_all(const std::vector<Word>& accepted, const Word& candidate, std::size_t target,
                  Dist dist) {
  for (auto it = accepted.rbegin(); it != accepted.rend(); ++it)
    if (dist(*it, candidate) < target) return false;
  return true;
}

Mask to_mask(const std::vector<std::uint8_t>& bits) {
  Mask m((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) m[i / 64] |= std::uint64_t{1} << (i % 64);
  return m;
}

Word mask_to_word(const Mask& m, std::size_t k) {
  Word w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = (m[i / 64] >> (i % 64)) & 1U;
  return w;
}

/// Words of length k <= 64 are encoded with string position p at bit
/// (k - 1 - p), so increasing integers run in lexicographic string order.
Mask small_to_mask(std::uint64_t v, std::size_t k) {
  Mask m(1, 0);
  for (std::size_t p = 0; p < k; ++p)
    if ((v >> (k - 1 - p)) & 1U) m[0] |= std::uint64_t{1} << p;
  return m;
}

std::uint64_t next_same_popcount(std::uint64_t v) {
  const std::uint64_t c = v & (~v + 1);
  const std::uint64_t r = v + c;
  return (((r ^ v) >> 2) / c) | r;
}

}  // namespace

double log_binomial(std::size_t n, std::size_t r) {
  if (r > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

std::size_t hamming_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw Error("hamming_distance: length mismatch");
  std::size_t dist = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dist += a[i] != b[i];
  return dist;
}

Code gv_constant_weight(std::size_t k, std::size_t l, std::optional<std::size_t> max_words,
                        const CodeOptions& options) {
  if (k == 0) throw Error("gv_constant_weight: length must be positive");
  if (l > k)
    throw Error("gv_constant_weight: weight " + std::to_string(l) + " exceeds length " +
                std::to_string(k));
  if (max_words && *max_words == 0) throw Error("gv_constant_weight: max_words must be positive");

  Code code;
  code.alphabet_size = 2;
  code.length = k;
  code.weight = l;
  code.claimed_min_distance = std::max<std::size_t>(1, ceil_div(l, 4));
  code.randomized = options.randomized;
  if (l >= 20 && 2 * l <= k) {
    const double base = static_cast<double>(k) / (std::pow(2.0, 7.0 / 8.0) * static_cast<double>(l));
    code.size_bound = std::pow(base, 7.0 * static_cast<double>(l) / 8.0);
  }

  const double candidates = std::exp(log_binomial(k, l));
  if (!options.randomized && !max_words && candidates > options.enumeration_cap)
    throw Error("gv_constant_weight: C(" + std::to_string(k) + "," + std::to_string(l) +
                ") candidates exceed the enumeration cap; pass max_words or use randomized mode");

  const std::size_t limit = max_words.value_or(std::numeric_limits<std::size_t>::max());
  const std::size_t target = code.claimed_min_distance;
  std::vector<Mask> accepted;
  auto dist = [](const Mask& a, const Mask& b) { return mask_distance(a, b); };
  bool exhausted = false;

  if (options.randomized) {
    Rng rng(options.seed);
    std::vector<std::size_t> positions(k);
    std::size_t rejects = 0;
    while (accepted.size() < limit && rejects < options.max_consecutive_rejects) {
      for (std::size_t i = 0; i < k; ++i) positions[i] = i;
      std::vector<std::uint8_t> bits(k, 0);
      for (std::size_t i = 0; i < l; ++i) {
        const std::size_t j = i + rng.below(k - i);
        std::swap(positions[i], positions[j]);
        bits[positions[i]] = 1;
      }
      Mask candidate = to_mask(bits);
      if (far_from_all(accepted, candidate, target, dist)) {
        accepted.push_back(std::move(candidate));
        rejects = 0;
      } else {
        ++rejects;
      }
    }
  } else if (k <= 64) {
    const std::uint64_t end = k == 64 ? 0 : (std::uint64_t{1} << k);
    std::uint64_t v = l == 0 ? 0 : (l == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << l) - 1);
    while (true) {
      if (accepted.size() >= limit) break;
      Mask candidate = small_to_mask(v, k);
      if (far_from_all(accepted, candidate, target, dist)) accepted.push_back(std::move(candidate));
      if (l == 0 || l == k) {
        exhausted = true;
        break;
      }
      const std::uint64_t next = next_same_popcount(v);
      // Past the last word the next value either overflows or leaves k bits.
      if (next <= v || (end != 0 && next >= end)) {
        exhausted = true;
        break;
      }
      v = next;
    }
  } else {
    std::vector<std::uint8_t> bits(k, 0);
    std::fill(bits.end() - static_cast<std::ptrdiff_t>(l), bits.end(), 1);
    do {
      if (accepted.size() >= limit) break;
      Mask candidate = to_mask(bits);
      if (far_from_all(accepted, candidate, target, dist)) accepted.push_back(std::move(candidate));
    } while (std::next_permutation(bits.begin(), bits.end()) || (exhausted = true, false));
  }

  code.truncated = !options.randomized && !exhausted;
  code.certified = code.size_bound.has_value() && !options.randomized && exhausted;
  code.words.reserve(accepted.size());
  for (const auto& m : accepted) code.words.push_back(mask_to_word(m, k));
  return code;
}

Code gv_qary(std::uint32_t h, std::size_t d, std::optional<std::size_t> max_words,
             const CodeOptions& options) {
  if (h < 2) throw Error("gv_qary: alphabet size must be at least 2");
  if (d < 2) throw Error("gv_qary: length must be at least 2");
  if (max_words && *max_words == 0) throw Error("gv_qary: max_words must be positive");

  Code code;
  code.alphabet_size = h;
  code.length = d;
  code.claimed_min_distance = ceil_div(d, 2);
  code.randomized = options.randomized;
  if (h >= 16)
    code.size_bound = std::pow(static_cast<double>(h) / 16.0, static_cast<double>(d) / 2.0);

  const double log_candidates = static_cast<double>(d) * std::log(static_cast<double>(h));
  if (!options.randomized && !max_words && log_candidates > std::log(options.enumeration_cap))
    throw Error("gv_qary: " + std::to_string(h) + "^" + std::to_string(d) +
                " candidates exceed the enumeration cap; pass max_words or use randomized mode");

  const std::size_t limit = max_words.value_or(std::numeric_limits<std::size_t>::max());
  const std::size_t target = code.claimed_min_distance;
  auto dist = [](const Word& a, const Word& b) { return hamming_distance(a, b); };
  bool exhausted = false;

  if (options.randomized) {
    Rng rng(options.seed);
    std::size_t rejects = 0;
    Word candidate(d);
    while (code.words.size() < limit && rejects < options.max_consecutive_rejects) {
      for (auto& s : candidate) s = static_cast<std::uint32_t>(rng.below(h));
      if (far_from_all(code.words, candidate, target, dist)) {
        code.words.push_back(candidate);
        rejects = 0;
      } else {
        ++rejects;
      }
    }
  } else {
    Word candidate(d, 0);
    while (true) {
      if (code.words.size() >= limit) break;
      if (far_from_all(code.words, candidate, target, dist)) code.words.push_back(candidate);
      std::size_t pos = d;
      while (pos > 0) {
        --pos;
        if (++candidate[pos] < h) break;
        candidate[pos] = 0;
      }
      if (pos == 0 && candidate[0] == 0) {
        exhausted = true;
        break;
      }
    }
  }

  code.truncated = !options.randomized && !exhausted;
  code.certified = code.size_bound.has_value() && !options.randomized && exhausted;
  return code;
}

std::size_t min_distance(const Code& code) {
  if (code.words.size() < 2) throw Error("min_distance: need at least two words");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < code.words.size(); ++i)
    for (std::size_t j = i + 1; j < code.words.size(); ++j)
      best = std::min(best, hamming_distance(code.words[i], code.words[j]));
  return best;
}

}  // namespace dpminimax
