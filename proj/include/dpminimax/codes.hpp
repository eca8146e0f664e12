#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dpminimax {

using Word = std::vector<std::uint32_t>;

/// A block code with a claimed minimum distance.
///
/// `size_bound` holds the Gilbert-Varshamov size guarantee when the
/// construction's preconditions hold; `certified` is true only when the
/// guarantee applies to this exact run (exhaustive enumeration, no cap).
struct Code {
  std::uint32_t alphabet_size = 2;
  std::size_t length = 0;
  std::vector<Word> words;
  std::optional<std::size_t> weight;
  std::size_t claimed_min_distance = 0;

  std::optional<double> size_bound;
  bool certified = false;
  bool randomized = false;
  bool truncated = false;

  std::size_t size() const { return words.size(); }
  bool meets_size_bound() const {
    return !size_bound || static_cast<double>(words.size()) >= *size_bound;
  }
};

struct CodeOptions {
  /// Largest candidate count that may be enumerated exhaustively.
  double enumeration_cap = 16777216.0;  // 2^24
  /// Use seeded random candidates instead of lexicographic enumeration.
  bool randomized = false;
  std::uint64_t seed = 0;
  /// Randomized mode stops after this many consecutive rejections.
  std::size_t max_consecutive_rejects = 200000;
};

/// Binary constant-weight code: words of length k with exactly l ones and
/// pairwise distance >= ceil(l/4), built greedily over lexicographic order.
Code gv_constant_weight(std::size_t k, std::size_t l,
                        std::optional<std::size_t> max_words = std::nullopt,
                        const CodeOptions& options = {});

/// h-ary code of length d with pairwise distance >= ceil(d/2), built greedily
/// over lexicographic order.
Code gv_qary(std::uint32_t h, std::size_t d, std::optional<std::size_t> max_words = std::nullopt,
             const CodeOptions& options = {});

std::size_t hamming_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Exact minimum pairwise distance; throws for fewer than two words.
std::size_t min_distance(const Code& code);

/// log C(n, r), used to size enumerations without overflow.
double log_binomial(std::size_t n, std::size_t r);

}  // namespace dpminimax
