#include <doctest.h>

#include "dnagpt/error.hpp"
#include "dnagpt/markov_backend.hpp"
#include "dnagpt/pipeline.hpp"
#include "dnagpt/revision.hpp"
#include "dnagpt/toy.hpp"
#include "support.hpp"

using namespace dnagpt;

namespace {

const toy::World& world() {
  static const toy::World w = toy::build_world();
  return w;
}

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " W" : "W") + std::to_string(i);
  return out;
}

std::size_t changed_tokens(const std::string& a, const std::string& b) {
  const auto ta = tokenize(a, TokenizeMode::kWhitespaceExact).tokens;
  const auto tb = tokenize(b, TokenizeMode::kWhitespaceExact).tokens;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ta.size(); ++i) n += ta[i] != tb[i];
  return n;
}

}  // namespace

TEST_CASE("ratio 0 is the identity") {
  const std::string text = "Keep  this\ttext exactly as written please";
  CHECK(revise_attack(text, {0.0, 5, 1}, *world().lm_b) == text);
}

TEST_CASE("ratio 1 on ten tokens replaces both spans") {
  const auto r = revise_tokens(words(10), {1.0, 5, 3}, *world().lm_b);
  CHECK(r.span_starts == std::vector<std::size_t>{0, 5});
  CHECK(tokenize(r.text).size() == 10);
  // Filler vocabulary is lowercase, the input is uppercase: every token changed.
  CHECK(changed_tokens(words(10), r.text) == 10);
}

TEST_CASE("ratio 0.2 on 100 tokens replaces exactly four spans, reproducibly") {
  const RevisionParams p{0.2, 5, 77};
  const auto r = revise_tokens(words(100), p, *world().lm_b);
  REQUIRE(r.span_starts.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(r.span_starts[i] >= r.span_starts[i - 1] + 5);
  CHECK(changed_tokens(words(100), r.text) == 20);
  CHECK(revise_tokens(words(100), p, *world().lm_b).span_starts == r.span_starts);
  CHECK(revise_tokens(words(100), {0.2, 5, 78}, *world().lm_b).span_starts != r.span_starts);
}

TEST_CASE("revision rejects bad parameters and short text") {
  CHECK_THROWS_AS(revise_attack(words(4), {0.5, 5, 1}, *world().lm_b), InvalidArgument);
  CHECK_THROWS_AS(revise_attack(words(10), {1.5, 5, 1}, *world().lm_b), InvalidArgument);
  CHECK_THROWS_AS(revise_attack(words(10), {0.5, 0, 1}, *world().lm_b), InvalidArgument);
}

TEST_CASE("property: token count is preserved and spans never overlap") {
  Rng rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 5 + rng.below(120);
    RevisionParams p{rng.uniform(), 1 + static_cast<int>(rng.below(6)), rng.next_u64()};
    if (len < static_cast<std::size_t>(p.span_length)) continue;
    const auto r = revise_tokens(words(len), p, *world().lm_b);
    REQUIRE(tokenize(r.text).size() == len);
    for (std::size_t i = 1; i < r.span_starts.size(); ++i) {
      REQUIRE(r.span_starts[i] >= r.span_starts[i - 1] + static_cast<std::size_t>(p.span_length));
    }
    REQUIRE(changed_tokens(words(len), r.text) == r.span_starts.size() * static_cast<std::size_t>(p.span_length));
  }
}

TEST_CASE("mean machine BScore degrades monotonically with the revision ratio") {
  MarkovBackend a("a", world().lm_a);
  toy::BenchmarkOptions opts;
  opts.pairs = 40;
  opts.seed = 404;
  const auto bench = toy::make_benchmark(*world().lm_a, opts);
  DetectionConfig cfg;
  cfg.generation.seed = 1;
  double prev = 1e300;
  for (double r : {0.0, 0.25, 0.5, 1.0}) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < bench.size(); i += 2) {
      const std::string revised = revise_attack(bench[i].text, {r, 5, mix_seed(i)}, *world().lm_b);
      sum += detect(revised, a, cfg).score;
      ++n;
    }
    const double mean = sum / n;
    CHECK(mean <= prev);
    prev = mean;
  }
}
