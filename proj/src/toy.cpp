#include "dnagpt/toy.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"
#include "dnagpt/rng.hpp"
#include "dnagpt/tokenizer.hpp"

namespace dnagpt::toy {
namespace {

// Word list drawn with Zipf weights 1 / (rank + 1)^s.
class Lexicon {
 public:
  Lexicon(std::vector<std::string> words, double s) : words_(std::move(words)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_.push_back(acc);
    }
  }

  const std::string& draw(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    std::size_t i = 0;
    while (i + 1 < cdf_.size() && cdf_[i] <= u) ++i;
    return words_[i];
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> cdf_;
};

struct Grammar {
  Lexicon nouns;
  Lexicon adjectives;
  Lexicon verbs;
  Lexicon adverbs;
  Lexicon prepositions;
  Lexicon determiners;
  Lexicon openers;
  // Sentence template weights, see sentence().
  std::array<double, 6> templates;
  double adjective_rate;
  double pp_rate;
};

// Both registers draw on the same function words and a shared core of
// everyday nouns; the topical lexicon is register specific.
const Grammar& grammar(Register reg) {
  static const Grammar maritime{
      Lexicon({"sea", "ship", "captain", "wave", "harbor", "sailor", "deck", "storm", "sail", "tide",
               "shore", "crew", "mast", "wind", "night", "anchor", "island", "rope", "light", "fog",
               "water", "cabin", "gull", "lantern", "boat", "reef", "hull", "current", "horizon", "bay",
               "man", "oar", "cliff", "compass", "spray", "keel", "lighthouse", "net", "fisherman", "voice"},
              1.3),
      Lexicon({"grey", "dark", "cold", "old", "wild", "salt", "broken", "distant", "heavy", "restless",
               "black", "long", "silent", "bitter", "great", "narrow", "wet", "white"},
              1.3),
      Lexicon({"sailed", "watched", "drifted", "hauled", "rolled", "steered", "called", "struck", "climbed",
               "waited", "pulled", "rose", "sank", "broke", "tied", "turned", "held", "heard"},
              1.3),
      Lexicon({"slowly", "hard", "again", "far", "silently", "at last", "all night"}, 1.0),
      Lexicon({"of", "on", "in", "across", "over", "toward", "beneath", "along", "against"}, 1.0),
      Lexicon({"the", "the", "a", "his", "their"}, 0.6),
      Lexicon({"then", "but", "and", "soon"}, 1.0),
      {0.34, 0.18, 0.16, 0.12, 0.12, 0.08},
      0.45,
      0.40,
  };
  static const Grammar pastoral{
      Lexicon({"field", "meadow", "shepherd", "farm", "flock", "hill", "orchard", "barn", "valley", "brook",
               "cottage", "garden", "sheep", "lane", "village", "harvest", "wheat", "hedge", "miller", "lamb",
               "day", "mill", "apple", "blossom", "hay", "goat", "well", "oak", "elm", "fence", "pasture",
               "cow", "bee", "hive", "woman", "road", "door", "stone", "heart", "child", "morning", "bread",
               "bell", "river", "spring", "summer", "basket", "grass", "path", "window"},
              0.75),
      Lexicon({"green", "golden", "gentle", "warm", "quiet", "sweet", "soft", "bright", "young", "ripe",
               "sunny", "little", "merry", "mossy", "pleasant", "old", "small", "white", "fresh", "kind",
               "tall", "low"},
              0.7),
      Lexicon({"walked", "wandered", "gathered", "planted", "sang", "rested", "carried", "tended", "picked",
               "followed", "grazed", "found", "kept", "crossed", "shared", "loved", "baked", "mended",
               "opened", "waited", "watched", "called"},
              0.7),
      Lexicon({"gently", "softly", "slowly", "happily", "together", "at dawn", "all day", "once more"}, 0.7),
      Lexicon({"of", "in", "by", "near", "under", "through", "beside", "with", "behind", "past"}, 0.7),
      Lexicon({"the", "a", "her", "our", "every", "that"}, 0.5),
      Lexicon({"and", "so", "while", "after that", "in time"}, 0.7),
      {0.20, 0.20, 0.18, 0.16, 0.14, 0.12},
      0.55,
      0.50,
  };
  return reg == Register::kMaritime ? maritime : pastoral;
}

void append_words(std::vector<std::string>& out, const std::string& phrase) {
  std::size_t start = 0;
  while (start <= phrase.size()) {
    const std::size_t sp = phrase.find(' ', start);
    const std::size_t end = sp == std::string::npos ? phrase.size() : sp;
    if (end > start) out.push_back(phrase.substr(start, end - start));
    if (sp == std::string::npos) break;
    start = sp + 1;
  }
}

class SentenceWriter {
 public:
  SentenceWriter(const Grammar& g, Rng& rng) : g_(g), rng_(rng) {}

  void noun_phrase(std::vector<std::string>& out, bool allow_pp) {
    append_words(out, g_.determiners.draw(rng_));
    if (rng_.uniform() < g_.adjective_rate) append_words(out, g_.adjectives.draw(rng_));
    append_words(out, g_.nouns.draw(rng_));
    if (allow_pp && rng_.uniform() < g_.pp_rate) prep_phrase(out);
  }

  void prep_phrase(std::vector<std::string>& out) {
    append_words(out, g_.prepositions.draw(rng_));
    noun_phrase(out, false);
  }

  void verb_phrase(std::vector<std::string>& out) {
    append_words(out, g_.verbs.draw(rng_));
    const double u = rng_.uniform();
    if (u < 0.5) {
      noun_phrase(out, true);
    } else if (u < 0.75) {
      prep_phrase(out);
    } else {
      append_words(out, g_.adverbs.draw(rng_));
    }
  }

  void clause(std::vector<std::string>& out) {
    noun_phrase(out, true);
    verb_phrase(out);
  }

  std::vector<std::string> sentence() {
    std::vector<std::string> out;
    const double total = [&] {
      double t = 0.0;
      for (double w : g_.templates) t += w;
      return t;
    }();
    double u = rng_.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < g_.templates.size() && u >= g_.templates[pick]) u -= g_.templates[pick++];
    switch (pick) {
      case 0:
        clause(out);
        break;
      case 1:
        prep_phrase(out);
        out.back() += ',';
        clause(out);
        break;
      case 2:
        clause(out);
        out.emplace_back("and");
        verb_phrase(out);
        break;
      case 3:
        append_words(out, g_.openers.draw(rng_));
        clause(out);
        break;
      case 4:
        clause(out);
        out.back() += ',';
        append_words(out, g_.openers.draw(rng_));
        clause(out);
        break;
      default:
        noun_phrase(out, false);
        append_words(out, g_.adverbs.draw(rng_));
        verb_phrase(out);
        break;
    }
    out.back() += '.';
    out.front()[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front()[0])));
    return out;
  }

 private:
  const Grammar& g_;
  Rng& rng_;
};

std::vector<std::string> generate_tokens(Register reg, std::uint64_t seed, std::size_t min_tokens) {
  Rng rng(mix_seed(seed ^ (reg == Register::kMaritime ? 0x6d61726974696d65ULL : 0x7061737472616cULL)));
  SentenceWriter writer(grammar(reg), rng);
  std::vector<std::string> tokens;
  while (tokens.size() < min_tokens) {
    auto s = writer.sentence();
    tokens.insert(tokens.end(), s.begin(), s.end());
  }
  return tokens;
}

}  // namespace

std::string_view to_string(Register reg) { return reg == Register::kMaritime ? "maritime" : "pastoral"; }

Register parse_register(std::string_view name) {
  if (name == "maritime" || name == "a") return Register::kMaritime;
  if (name == "pastoral" || name == "b") return Register::kPastoral;
  throw InvalidArgument("unknown register '" + std::string(name) + "'");
}

std::string generate_corpus(Register reg, std::uint64_t seed, std::size_t min_tokens) {
  return join_tokens(generate_tokens(reg, seed, min_tokens));
}

std::string generate_passage(Register reg, std::uint64_t seed, std::size_t tokens) {
  auto t = generate_tokens(reg, seed, tokens);
  t.resize(tokens);
  return join_tokens(t);
}

World build_world(const WorldOptions& opts) {
  World w;
  w.corpus_a = generate_corpus(Register::kMaritime, opts.seed, opts.corpus_tokens);
  w.corpus_b = generate_corpus(Register::kPastoral, opts.seed + 1, opts.corpus_tokens);
  const auto ta = tokenize(w.corpus_a, TokenizeMode::kWhitespaceLower);
  const auto tb = tokenize(w.corpus_b, TokenizeMode::kWhitespaceLower);
  w.lm_a = std::make_shared<const MarkovLM>(fit_markov(ta.tokens, opts.order, opts.alpha));
  w.lm_b = std::make_shared<const MarkovLM>(fit_markov(tb.tokens, opts.order, opts.alpha));
  return w;
}

std::vector<LabeledSample> make_benchmark(const MarkovLM& machine, const BenchmarkOptions& opts) {
  if (opts.pairs == 0) throw InvalidArgument("benchmark needs at least one pair");
  if (opts.min_tokens < 4 || opts.max_tokens < opts.min_tokens) {
    throw InvalidArgument("benchmark lengths must satisfy 4 <= min_tokens <= max_tokens");
  }
  if (!(opts.machine_fraction > 0.0 && opts.machine_fraction <= 1.0)) {
    throw InvalidArgument("machine_fraction must be in (0, 1]");
  }
  std::vector<LabeledSample> out;
  out.reserve(2 * opts.pairs);
  Rng rng(mix_seed(opts.seed));
  for (std::size_t i = 0; i < opts.pairs; ++i) {
    const std::size_t len = opts.min_tokens + rng.below(opts.max_tokens - opts.min_tokens + 1);
    // Held-out seeds live in a different range from build_world's.
    const std::uint64_t passage_seed = mix_seed(opts.seed * 1000003ULL + i) | (1ULL << 63);
    const auto human = tokenize(generate_passage(opts.human_register, passage_seed, len),
                                TokenizeMode::kWhitespaceExact);

    const auto written = static_cast<std::size_t>(std::llround(opts.machine_fraction * static_cast<double>(len)));
    const std::size_t kept = len - std::max<std::size_t>(written, 1);
    std::vector<std::string> machine_tokens(human.tokens.begin(), human.tokens.begin() + static_cast<std::ptrdiff_t>(kept));
    const auto folded = tokenize(join_tokens(machine_tokens), TokenizeMode::kWhitespaceLower);
    auto cont = machine.sample(folded.tokens, static_cast<int>(len - kept), opts.temperature,
                               mix_seed(passage_seed ^ 0x9e3779b97f4a7c15ULL));
    machine_tokens.insert(machine_tokens.end(), cont.begin(), cont.end());

    LabeledSample m;
    m.id = "toy-m-" + std::to_string(i);
    m.text = join_tokens(machine_tokens);
    m.label = Label::kMachine;
    m.source_model = opts.machine_model_name;
    LabeledSample h;
    h.id = "toy-h-" + std::to_string(i);
    h.text = human.joined();
    h.label = Label::kHuman;
    out.push_back(std::move(m));
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace dnagpt::toy
