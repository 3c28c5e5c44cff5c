#include "dnagpt/markov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dnagpt/error.hpp"
#include "dnagpt/rng.hpp"

namespace dnagpt {
namespace {

constexpr std::string_view kFormat = "dnagpt-markov";
constexpr int kVersion = 1;

std::u32string key_of(std::span<const TokenId> ids) {
  return std::u32string(ids.begin(), ids.end());
}

}  // namespace

MarkovLM::MarkovLM(int order, double alpha, std::vector<std::string> vocabulary,
                   std::unordered_map<std::u32string, NextCounts> table)
    : order_(order), alpha_(alpha), vocab_(std::move(vocabulary)) {
  if (order_ < 1) throw InvalidArgument("markov order must be >= 1");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InvalidArgument("smoothing alpha must be positive");
  if (!std::is_sorted(vocab_.begin(), vocab_.end()) ||
      std::adjacent_find(vocab_.begin(), vocab_.end()) != vocab_.end()) {
    throw InvalidArgument("vocabulary must be sorted and unique");
  }
  for (TokenId i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
  auto unk = index_.find(std::string(kUnknownToken));
  if (unk == index_.end()) throw InvalidArgument("vocabulary lacks the reserved unknown token");
  unk_ = unk->second;

  for (const auto& [ctx, nc] : table) {
    if (ctx.size() != static_cast<std::size_t>(order_)) throw InvalidArgument("context length != order");
    std::uint64_t total = 0;
    for (const auto& [id, c] : nc.next) {
      if (id >= vocab_.size()) throw InvalidArgument("token id out of range in count table");
      total += c;
    }
    for (char32_t id : ctx) {
      if (id >= vocab_.size()) throw InvalidArgument("token id out of range in context");
    }
    if (total != nc.total || total == 0) throw InvalidArgument("inconsistent context total");
  }

  // Marginalize suffixes: tables_[l][last l tokens] = sum of order-m rows.
  tables_.resize(static_cast<std::size_t>(order_) + 1);
  tables_.back() = std::move(table);
  for (int l = order_ - 1; l >= 0; --l) {
    std::unordered_map<std::u32string, std::map<TokenId, std::uint64_t>> acc;
    for (const auto& [ctx, nc] : tables_.back()) {
      auto& row = acc[ctx.substr(ctx.size() - static_cast<std::size_t>(l))];
      for (const auto& [id, c] : nc.next) row[id] += c;
    }
    auto& lower = tables_[static_cast<std::size_t>(l)];
    for (auto& [suffix, row] : acc) {
      NextCounts nc;
      nc.next.assign(row.begin(), row.end());
      for (const auto& [id, c] : nc.next) nc.total += c;
      lower.emplace(suffix, std::move(nc));
    }
  }
  if (tables_[0].empty()) throw InvalidArgument("empty count table");
}

TokenId MarkovLM::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_ : it->second;
}

std::vector<TokenId> MarkovLM::ids_of(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

const MarkovLM::NextCounts* MarkovLM::counts(std::span<const TokenId> context) const {
  if (context.size() > static_cast<std::size_t>(order_)) return nullptr;
  const auto& table = tables_[context.size()];
  auto it = table.find(key_of(context));
  return it == table.end() ? nullptr : &it->second;
}

const MarkovLM::NextCounts& MarkovLM::backoff(std::span<const TokenId> context) const {
  std::size_t len = std::min(context.size(), static_cast<std::size_t>(order_));
  for (;; --len) {
    if (const auto* nc = counts(context.subspan(context.size() - len))) return *nc;
    // len == 0 always hits: the empty context holds every observation.
  }
}

double MarkovLM::logprob_next(std::span<const TokenId> context, TokenId next) const {
  const NextCounts& nc = backoff(context);
  auto it = std::lower_bound(nc.next.begin(), nc.next.end(), next,
                             [](const auto& p, TokenId id) { return p.first < id; });
  const double count = (it != nc.next.end() && it->first == next) ? static_cast<double>(it->second) : 0.0;
  const double denom = static_cast<double>(nc.total) + alpha_ * static_cast<double>(vocab_.size());
  return std::log(count + alpha_) - std::log(denom);
}

std::vector<double> MarkovLM::next_distribution(std::span<const TokenId> context, double temperature) const {
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  const NextCounts& nc = backoff(context);
  std::vector<double> p(vocab_.size());
  if (temperature == 0.0) {
    auto best = std::max_element(nc.next.begin(), nc.next.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    p[best->first] = 1.0;  // max_element keeps the first (smallest id) maximum
    return p;
  }
  const double inv_t = 1.0 / temperature;
  const double unseen = inv_t * std::log(alpha_);
  double top = unseen;
  for (const auto& [id, c] : nc.next) top = std::max(top, inv_t * std::log(static_cast<double>(c) + alpha_));
  std::fill(p.begin(), p.end(), std::exp(unseen - top));
  for (const auto& [id, c] : nc.next) p[id] = std::exp(inv_t * std::log(static_cast<double>(c) + alpha_) - top);
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> MarkovLM::score_per_token(std::span<const std::string> prefix,
                                              std::span<const std::string> continuation) const {
  std::vector<TokenId> ctx = ids_of(prefix);
  std::vector<double> out;
  out.reserve(continuation.size());
  for (const auto& tok : continuation) {
    const TokenId id = id_of(tok);
    out.push_back(logprob_next(ctx, id));
    ctx.push_back(id);
  }
  return out;
}

double MarkovLM::score(std::span<const std::string> prefix, std::span<const std::string> continuation) const {
  double sum = 0.0;
  for (double lp : score_per_token(prefix, continuation)) sum += lp;
  return sum;
}

std::vector<std::string> MarkovLM::sample(std::span<const std::string> prefix, int max_tokens,
                                          double temperature, std::uint64_t seed) const {
  if (max_tokens < 0) throw InvalidArgument("max_tokens must be >= 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw InvalidArgument("temperature must be >= 0");
  Rng rng(seed);
  std::vector<TokenId> ctx = ids_of(prefix);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(max_tokens));
  const double inv_t = temperature > 0.0 ? 1.0 / temperature : 0.0;

  for (int step = 0; step < max_tokens; ++step) {
    const NextCounts& nc = backoff(ctx);
    TokenId chosen = 0;
    if (temperature == 0.0) {
      chosen = std::max_element(nc.next.begin(), nc.next.end(),
                                [](const auto& a, const auto& b) { return a.second < b.second; })
                   ->first;
    } else {
      // Seen tokens are weighted individually; all unseen tokens share one
      // weight, so they are drawn as a bucket and then uniformly within it.
      const double unseen_lw = inv_t * std::log(alpha_);
      double top = unseen_lw;
      for (const auto& [id, c] : nc.next) top = std::max(top, inv_t * std::log(static_cast<double>(c) + alpha_));
      const double unseen_w = std::exp(unseen_lw - top);
      const std::size_t n_unseen = vocab_.size() - nc.next.size();
      double seen_total = 0.0;
      for (const auto& [id, c] : nc.next) seen_total += std::exp(inv_t * std::log(static_cast<double>(c) + alpha_) - top);
      const double total = seen_total + unseen_w * static_cast<double>(n_unseen);

      double u = rng.uniform() * total;
      bool picked = false;
      for (const auto& [id, c] : nc.next) {
        u -= std::exp(inv_t * std::log(static_cast<double>(c) + alpha_) - top);
        if (u < 0.0) {
          chosen = id;
          picked = true;
          break;
        }
      }
      if (!picked) {
        if (n_unseen == 0) {
          chosen = nc.next.back().first;
        } else {
          auto r = static_cast<std::size_t>(std::max(0.0, u) / unseen_w);
          r = std::min(r, n_unseen - 1);
          // r-th id not present in nc.next (both sorted ascending).
          TokenId id = 0;
          std::size_t seen_i = 0;
          for (;; ++id) {
            if (seen_i < nc.next.size() && nc.next[seen_i].first == id) {
              ++seen_i;
              continue;
            }
            if (r == 0) break;
            --r;
          }
          chosen = id;
        }
      }
    }
    out.push_back(vocab_[chosen]);
    ctx.push_back(chosen);
  }
  return out;
}

nlohmann::json MarkovLM::to_json() const {
  std::vector<const std::pair<const std::u32string, NextCounts>*> rows;
  rows.reserve(table().size());
  for (const auto& row : table()) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->first < b->first; });

  nlohmann::json contexts = nlohmann::json::array();
  for (const auto* row : rows) {
    nlohmann::json ctx = nlohmann::json::array();
    for (char32_t id : row->first) ctx.push_back(static_cast<std::uint32_t>(id));
    nlohmann::json next = nlohmann::json::array();
    for (const auto& [id, c] : row->second.next) next.push_back({id, c});
    contexts.push_back({ctx, next});
  }
  return {{"format", kFormat}, {"version", kVersion}, {"order", order_},
          {"alpha", alpha_},   {"vocab", vocab_},     {"contexts", std::move(contexts)}};
}

MarkovLM MarkovLM::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw InvalidArgument("not a markov model file");
    if (j.at("version").get<int>() != kVersion) throw InvalidArgument("unsupported markov model version");
    const int order = j.at("order").get<int>();
    std::unordered_map<std::u32string, NextCounts> table;
    for (const auto& row : j.at("contexts")) {
      std::u32string ctx;
      for (const auto& id : row.at(0)) ctx.push_back(id.get<std::uint32_t>());
      NextCounts nc;
      for (const auto& pair : row.at(1)) {
        nc.next.emplace_back(pair.at(0).get<TokenId>(), pair.at(1).get<std::uint64_t>());
        nc.total += nc.next.back().second;
      }
      if (!std::is_sorted(nc.next.begin(), nc.next.end())) throw InvalidArgument("unsorted next-token row");
      if (!table.emplace(std::move(ctx), std::move(nc)).second) throw InvalidArgument("duplicate context row");
    }
    return MarkovLM(order, j.at("alpha").get<double>(), j.at("vocab").get<std::vector<std::string>>(),
                    std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed markov model: ") + e.what());
  }
}

void MarkovLM::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file " + path.string());
  out << to_json().dump() << '\n';
}

MarkovLM MarkovLM::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed markov model " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

MarkovLM fit_markov(std::span<const std::string> corpus, int order, double alpha) {
  if (order < 1) throw InvalidArgument("markov order must be >= 1");
  if (!(alpha > 0.0)) throw InvalidArgument("smoothing alpha must be positive");
  if (corpus.size() < static_cast<std::size_t>(order) + 1) {
    throw InvalidArgument("corpus too short: need at least order+1 tokens");
  }
  std::set<std::string> distinct(corpus.begin(), corpus.end());
  distinct.emplace(MarkovLM::kUnknownToken);
  std::vector<std::string> vocab(distinct.begin(), distinct.end());
  std::unordered_map<std::string_view, TokenId> index;
  for (TokenId i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);

  std::vector<TokenId> ids;
  ids.reserve(corpus.size());
  for (const auto& t : corpus) ids.push_back(index.at(t));

  std::unordered_map<std::u32string, std::map<TokenId, std::uint64_t>> raw;
  const auto m = static_cast<std::size_t>(order);
  for (std::size_t i = m; i < ids.size(); ++i) {
    raw[std::u32string(ids.begin() + static_cast<std::ptrdiff_t>(i - m),
                       ids.begin() + static_cast<std::ptrdiff_t>(i))][ids[i]] += 1;
  }
  std::unordered_map<std::u32string, MarkovLM::NextCounts> table;
  for (auto& [ctx, next] : raw) {
    MarkovLM::NextCounts nc;
    nc.next.assign(next.begin(), next.end());
    for (const auto& [id, c] : nc.next) nc.total += c;
    table.emplace(ctx, std::move(nc));
  }
  return MarkovLM(order, alpha, std::move(vocab), std::move(table));
}

std::vector<std::string> sample_markov(const MarkovLM& lm, std::span<const std::string> prefix,
                                       int max_tokens, double temperature, std::uint64_t seed) {
  return lm.sample(prefix, max_tokens, temperature, seed);
}

}  // namespace dnagpt
