#include "dnagpt/revision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"
#include "dnagpt/rng.hpp"
#include "dnagpt/tokenizer.hpp"

namespace dnagpt {

void RevisionParams::validate() const {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("revision ratio must be in [0, 1]");
  if (span_length < 1) throw InvalidArgument("span length must be >= 1");
  if (!(temperature >= 0.0)) throw InvalidArgument("filler temperature must be >= 0");
}

RevisionResult revise_tokens(std::string_view text, const RevisionParams& params, const MarkovLM& filler) {
  params.validate();
  TokenSequence seq = tokenize(text, TokenizeMode::kWhitespaceExact);
  // Case-folded twin used to condition the filler model.
  TokenSequence folded = tokenize(text, TokenizeMode::kWhitespaceLower);
  const auto span = static_cast<std::size_t>(params.span_length);
  if (seq.size() < span) {
    throw InvalidArgument("text has " + std::to_string(seq.size()) + " tokens, fewer than the span length " +
                          std::to_string(span));
  }
  RevisionResult result;
  if (params.ratio == 0.0) {
    result.text = std::string(text);
    return result;
  }

  const std::size_t max_spans = seq.size() / span;
  const auto wanted = static_cast<std::size_t>(std::llround(params.ratio * static_cast<double>(seq.size()) /
                                                            static_cast<double>(span)));
  const std::size_t n_spans = std::min(max_spans, wanted);

  // Uniform over non-overlapping placements: choose n_spans of the
  // (free + n_spans) slots, where each chosen slot expands to a span.
  Rng rng(mix_seed(params.seed));
  const std::size_t free_tokens = seq.size() - n_spans * span;
  std::vector<std::size_t> slots(free_tokens + n_spans);
  std::iota(slots.begin(), slots.end(), 0);
  for (std::size_t i = 0; i < n_spans; ++i) {
    std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);
  }
  slots.resize(n_spans);
  std::sort(slots.begin(), slots.end());

  for (std::size_t i = 0; i < n_spans; ++i) {
    const std::size_t start = slots[i] + i * (span - 1);
    result.span_starts.push_back(start);
    const std::span<const std::string> context(folded.tokens.data(), start);
    auto fill = filler.sample(context, params.span_length, params.temperature, mix_seed(params.seed + 1 + i));
    std::copy(fill.begin(), fill.end(), seq.tokens.begin() + static_cast<std::ptrdiff_t>(start));
    std::copy(fill.begin(), fill.end(), folded.tokens.begin() + static_cast<std::ptrdiff_t>(start));
  }
  result.text = seq.joined();
  return result;
}

std::string revise_attack(std::string_view text, const RevisionParams& params, const MarkovLM& filler) {
  return revise_tokens(text, params, filler).text;
}

}  // namespace dnagpt
