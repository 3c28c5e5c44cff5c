#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace dnagpt {

using TokenId = std::uint32_t;

// Order-m count-based language model with additive (Laplace) smoothing.
//
// p(w | ctx) = (count(ctx', w) + alpha) / (total(ctx') + alpha * |V|), where
// ctx' is the longest suffix of the last m context tokens that was observed
// during fitting. Suffix counts of length < m are marginals of the order-m
// table, so the order-m table is the only state. Every conditional is a proper
// distribution over the vocabulary, and every sequence has finite
// log-probability.
//
// The vocabulary is sorted, so token ids order lexicographically. Unseen words
// map to the reserved "<unk>" entry. Immutable after construction and safe to
// share between threads.
class MarkovLM {
 public:
  static constexpr std::string_view kUnknownToken = "<unk>";

  struct NextCounts {
    std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by id
    std::uint64_t total = 0;
  };

  MarkovLM(int order, double alpha, std::vector<std::string> vocabulary,
           std::unordered_map<std::u32string, NextCounts> table);

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  TokenId unknown_id() const noexcept { return unk_; }

  TokenId id_of(std::string_view token) const;
  std::vector<TokenId> ids_of(std::span<const std::string> tokens) const;

  // Counts observed after exactly this context (length 0..order), or nullptr.
  const NextCounts* counts(std::span<const TokenId> context) const;

  // The order-m table, for serialization and independent checks.
  const std::unordered_map<std::u32string, NextCounts>& table() const noexcept { return tables_.back(); }

  double logprob_next(std::span<const TokenId> context, TokenId next) const;

  // Full next-token distribution after applying temperature (p^(1/T),
  // renormalized). T == 0 puts all mass on the argmax.
  std::vector<double> next_distribution(std::span<const TokenId> context, double temperature) const;

  // log p(continuation | prefix), natural log.
  double score(std::span<const std::string> prefix, std::span<const std::string> continuation) const;
  std::vector<double> score_per_token(std::span<const std::string> prefix,
                                      std::span<const std::string> continuation) const;

  // Autoregressive sampling. T == 0 is greedy with the lexicographically
  // smallest token winning ties.
  std::vector<std::string> sample(std::span<const std::string> prefix, int max_tokens,
                                  double temperature, std::uint64_t seed) const;

  nlohmann::json to_json() const;
  static MarkovLM from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static MarkovLM load(const std::filesystem::path& path);

 private:
  // Longest observed suffix of `context` (at most `order_` tokens).
  const NextCounts& backoff(std::span<const TokenId> context) const;

  int order_;
  double alpha_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId unk_ = 0;
  // tables_[l] holds contexts of length l; tables_[0] has the single empty key.
  std::vector<std::unordered_map<std::u32string, NextCounts>> tables_;
};

MarkovLM fit_markov(std::span<const std::string> corpus, int order, double alpha = 0.1);

std::vector<std::string> sample_markov(const MarkovLM& lm, std::span<const std::string> prefix,
                                       int max_tokens, double temperature, std::uint64_t seed);

}  // namespace dnagpt
