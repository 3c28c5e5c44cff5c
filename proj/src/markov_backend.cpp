#include "dnagpt/markov_backend.hpp"

#include <random>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"

namespace dnagpt {

MarkovBackend::MarkovBackend(std::string id, std::shared_ptr<const MarkovLM> lm, TokenizeMode mode)
    : lm_(std::move(lm)), mode_(mode) {
  if (!lm_) throw InvalidArgument("markov backend needs a model");
  desc_.id = std::move(id);
  desc_.kind = BackendKind::kMarkov;
  desc_.capabilities = {true, true};
}

std::vector<Continuation> MarkovBackend::generate(const GenerationRequest& request) {
  request.params.validate();
  const TokenSequence prefix = tokenize(request.prefix, mode_);
  const std::uint64_t base =
      request.params.seed ? *request.params.seed : std::random_device{}() ^ (std::uint64_t{std::random_device{}()} << 32);
  Fnv1a h;
  for (const auto& t : prefix.tokens) h.field(t);
  const std::uint64_t prefix_hash = h.digest();

  std::vector<Continuation> out;
  out.reserve(static_cast<std::size_t>(request.params.num_samples));
  for (int k = 0; k < request.params.num_samples; ++k) {
    const std::uint64_t seed = mix_seed(mix_seed(base ^ prefix_hash) + static_cast<std::uint64_t>(k));
    auto tokens = lm_->sample(prefix.tokens, request.params.max_tokens, request.params.temperature, seed);
    Continuation c;
    c.logprob = lm_->score(prefix.tokens, tokens);
    c.text = join_tokens(tokens);
    out.push_back(std::move(c));
  }
  return out;
}

double MarkovBackend::score(std::string_view prefix, std::string_view continuation) {
  return lm_->score(tokenize(prefix, mode_).tokens, tokenize(continuation, mode_).tokens);
}

}  // namespace dnagpt
