#pragma once

#include <memory>

#include "dnagpt/backend.hpp"
#include "dnagpt/markov.hpp"
#include "dnagpt/tokenizer.hpp"

namespace dnagpt {

// Offline backend over a fitted MarkovLM. Generation and scoring are exact and,
// given a seed, bit-reproducible: continuation k is sampled with a seed derived
// from (params.seed, prefix tokens, k). Prompts and system messages are ignored;
// only the prefix conditions the model.
class MarkovBackend final : public Backend {
 public:
  MarkovBackend(std::string id, std::shared_ptr<const MarkovLM> lm,
                TokenizeMode mode = TokenizeMode::kWhitespaceLower);

  const BackendDescriptor& descriptor() const override { return desc_; }
  std::vector<Continuation> generate(const GenerationRequest& request) override;
  double score(std::string_view prefix, std::string_view continuation) override;

  const MarkovLM& model() const { return *lm_; }

 private:
  BackendDescriptor desc_;
  std::shared_ptr<const MarkovLM> lm_;
  TokenizeMode mode_;
};

}  // namespace dnagpt
