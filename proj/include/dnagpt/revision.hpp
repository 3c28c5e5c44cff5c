#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dnagpt/markov.hpp"

namespace dnagpt {

struct RevisionParams {
  double ratio = 0.0;       // fraction of tokens to rewrite
  int span_length = 5;
  std::uint64_t seed = 0;
  double temperature = 1.0;  // filler sampling temperature

  void validate() const;
};

struct RevisionResult {
  std::string text;
  std::vector<std::size_t> span_starts;  // token offsets of replaced spans
};

// Simulated human revision: round(ratio * L / span_length) non-overlapping
// spans, placed uniformly at random, are each replaced by span_length tokens
// sampled from `filler` conditioned on the text before the span. Token count
// is preserved; ratio 0 returns the input unchanged.
RevisionResult revise_tokens(std::string_view text, const RevisionParams& params, const MarkovLM& filler);

std::string revise_attack(std::string_view text, const RevisionParams& params, const MarkovLM& filler);

}  // namespace dnagpt
