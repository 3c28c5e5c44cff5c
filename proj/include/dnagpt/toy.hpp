#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dnagpt/dataset.hpp"
#include "dnagpt/markov.hpp"

namespace dnagpt::toy {

// Two prose registers produced by a seeded phrase grammar. They share
// function words and a common core vocabulary but differ in topical lexicon
// and phrase preferences, so corpora drawn from them are disjoint texts with
// partially overlapping vocabularies.
enum class Register { kMaritime, kPastoral };

std::string_view to_string(Register reg);
Register parse_register(std::string_view name);

// Whole sentences until at least min_tokens whitespace tokens are produced.
std::string generate_corpus(Register reg, std::uint64_t seed, std::size_t min_tokens);

// Exactly `tokens` tokens (the last sentence may be cut).
std::string generate_passage(Register reg, std::uint64_t seed, std::size_t tokens);

struct WorldOptions {
  std::size_t corpus_tokens = 50000;
  int order = 2;
  double alpha = 0.1;
  std::uint64_t seed = 20230527;
};

// Machine model A (maritime) and an independent model B (pastoral), each fitted
// on its own corpus.
struct World {
  std::shared_ptr<const MarkovLM> lm_a;
  std::shared_ptr<const MarkovLM> lm_b;
  std::string corpus_a;
  std::string corpus_b;
};

World build_world(const WorldOptions& opts = {});

struct BenchmarkOptions {
  std::size_t pairs = 100;
  std::size_t min_tokens = 120;
  std::size_t max_tokens = 200;
  double machine_fraction = 0.5;  // share of each machine sample written by the model
  double temperature = 0.7;
  std::uint64_t seed = 7;
  Register human_register = Register::kPastoral;
  std::string machine_model_name = "toy-a";
};

// `pairs` matched (machine, human) samples. Pair i draws one held-out passage
// from the human register; the human sample is that passage and the machine
// sample keeps its leading (1 - machine_fraction) share and lets `machine`
// write the rest at the given temperature. Held-out passages use seeds
// disjoint from the training corpora. Both samples of a pair have equal length.
std::vector<LabeledSample> make_benchmark(const MarkovLM& machine, const BenchmarkOptions& opts = {});

}  // namespace dnagpt::toy
