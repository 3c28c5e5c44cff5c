#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnagpt/tokenizer.hpp"

namespace dnagpt {

using NGram = std::vector<std::string>;

// Deduplicated set of contiguous n-token windows of one sequence.
struct NGramSet {
  int n = 0;
  std::set<NGram> grams;

  std::size_t size() const noexcept { return grams.size(); }
  bool contains(const NGram& g) const { return grams.count(g) != 0; }
};

NGramSet extract_ngrams(const TokenSequence& seq, int n);

// Length weights f(n) for the overlap score.
enum class WeightFn { kLog, kLinear, kNLogN, kNLog2N, kSquare, kExp };

WeightFn parse_weight_fn(std::string_view name);
std::string_view to_string(WeightFn fn);
double weight(WeightFn fn, int n);
double log_weight(WeightFn fn, int n);

struct ScoreConfig {
  int n0 = 4;
  int n_max = 25;
  WeightFn weight_fn = WeightFn::kNLogN;
  // Upper bound on evidence items kept in a score / report.
  std::size_t evidence_cap = 500;

  // Throws InvalidArgument unless 1 <= n0 <= n_max and f(n) > 0 on [n0, n_max].
  void validate() const;
};

// One n-gram shared by Y0 and regeneration k (1-based), with the offset of its
// first occurrence in each.
struct EvidenceItem {
  NGram ngram;
  int n = 0;
  int k = 0;
  std::size_t pos_y0 = 0;
  std::size_t pos_yk = 0;

  std::string text() const;
  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct BlackboxScore {
  double value = 0.0;
  // Contribution of each gram length, already averaged over K.
  std::map<int, double> per_n_terms;
  // Score of each regeneration on its own (K = 1); value is their mean.
  std::vector<double> per_k_terms;
  // Longest grams first; at most ScoreConfig::evidence_cap entries.
  std::vector<EvidenceItem> evidence;
  std::size_t evidence_total = 0;
  bool evidence_truncated = false;
};

// Weighted n-gram overlap between the remainder y0 and the regenerations:
//
//   (1/K) sum_k sum_{n=n0..N} f(n) |grams(Yk,n) & grams(Y0,n)| / (|Yk| |grams(Y0,n)|)
//
// Terms with a zero denominator contribute nothing.
BlackboxScore bscore(const TokenSequence& y0, std::span<const TokenSequence> omega,
                     const ScoreConfig& cfg = {});

// Every shared gram with n in [n0, N], uncapped, sorted by descending n, then
// ascending k, then ascending position in y0.
std::vector<EvidenceItem> extract_evidence(const TokenSequence& y0,
                                           std::span<const TokenSequence> omega,
                                           const ScoreConfig& cfg = {});

}  // namespace dnagpt
