#include "dnagpt/replay_cache.hpp"

#include <mutex>

#include <json.hpp>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"

namespace dnagpt {
namespace {

nlohmann::json response_json(const Continuation& c) {
  return {{"text", c.text}, {"logprob", c.logprob ? nlohmann::json(*c.logprob) : nlohmann::json(nullptr)}};
}

Continuation parse_response(const nlohmann::json& j) {
  Continuation c;
  c.text = j.at("text").get<std::string>();
  if (const auto& lp = j.at("logprob"); !lp.is_null()) c.logprob = lp.get<double>();
  return c;
}

}  // namespace

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::ifstream in(path_, std::ios::binary); in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::string key = "line " + std::to_string(line_no);
      try {
        const auto j = nlohmann::json::parse(line);
        key = j.at("key").get<std::string>();
        Continuation c = parse_response(j.at("response"));
        auto [it, inserted] = entries_.emplace(key, c);
        if (!inserted && !(it->second == c)) {
          throw CacheCorruptError("conflicting cache records for key " + key + " in " + path_.string(), key);
        }
      } catch (const nlohmann::json::exception& e) {
        throw CacheCorruptError("corrupt cache record (" + key + ") in " + path_.string() + ": " + e.what(), key);
      }
    }
  }
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cache file is not writable: " + path_.string());
}

std::optional<Continuation> ReplayCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayCache::record(const std::string& key, std::string_view backend_id, std::string_view kind, int index,
                         const Continuation& response) {
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, response).second) return;
  nlohmann::json j{{"key", key},
                   {"backend", backend_id},
                   {"kind", kind},
                   {"index", index},
                   {"response", response_json(response)}};
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("failed to append to cache file " + path_.string());
}

std::size_t ReplayCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string score_cache_key(std::string_view backend_id, std::string_view prefix, std::string_view continuation) {
  Fnv1a h;
  h.field(backend_id).field("score").field(prefix).field(continuation);
  return to_hex(h.digest());
}

CachedBackend::CachedBackend(BackendPtr inner, std::shared_ptr<ReplayCache> cache, bool strict)
    : inner_(std::move(inner)), cache_(std::move(cache)), strict_(strict) {
  if (!inner_ || !cache_) throw InvalidArgument("cached backend needs an inner backend and a cache");
  desc_ = inner_->descriptor();
  desc_.cache_path = cache_->path().string();
  desc_.strict = strict;
}

CachedBackend::CachedBackend(BackendDescriptor desc, std::shared_ptr<ReplayCache> cache)
    : desc_(std::move(desc)), cache_(std::move(cache)), strict_(true) {
  if (!cache_) throw InvalidArgument("replay backend needs a cache");
  desc_.kind = BackendKind::kReplay;
  desc_.cache_path = cache_->path().string();
}

std::vector<Continuation> CachedBackend::generate(const GenerationRequest& request) {
  const int k = request.params.num_samples;
  std::vector<std::string> keys;
  std::vector<std::optional<Continuation>> hits;
  keys.reserve(static_cast<std::size_t>(k));
  bool all_hit = true;
  for (int i = 0; i < k; ++i) {
    keys.push_back(request.cache_key(key_id(), i));
    hits.push_back(cache_->lookup(keys.back()));
    all_hit = all_hit && hits.back().has_value();
  }
  if (!all_hit) {
    if (strict_ || !inner_) {
      std::size_t miss = 0;
      while (hits[miss]) ++miss;
      throw CacheMissError("cache miss for request " + keys[miss] + " (backend '" + key_id() + "', index " +
                               std::to_string(miss) + ")",
                           keys[miss]);
    }
    ++inner_calls_;
    auto fresh = inner_->generate(request);
    if (fresh.size() != static_cast<std::size_t>(k)) {
      throw PartialResultsError("backend '" + inner_->id() + "' returned too few continuations");
    }
    for (int i = 0; i < k; ++i) {
      if (hits[static_cast<std::size_t>(i)]) continue;
      cache_->record(keys[static_cast<std::size_t>(i)], key_id(), "generate", i, fresh[static_cast<std::size_t>(i)]);
      hits[static_cast<std::size_t>(i)] = fresh[static_cast<std::size_t>(i)];
    }
  }
  std::vector<Continuation> out;
  out.reserve(hits.size());
  for (auto& h : hits) out.push_back(std::move(*h));
  return out;
}

double CachedBackend::score(std::string_view prefix, std::string_view continuation) {
  const std::string key = score_cache_key(key_id(), prefix, continuation);
  if (auto hit = cache_->lookup(key)) {
    if (!hit->logprob) throw CacheCorruptError("score record without logprob: " + key, key);
    return *hit->logprob;
  }
  if (strict_ || !inner_) throw CacheMissError("cache miss for score request " + key, key);
  ++inner_calls_;
  const double lp = inner_->score(prefix, continuation);
  cache_->record(key, key_id(), "score", 0, Continuation{"", lp});
  return lp;
}

BackendPtr cached(BackendPtr backend, const std::filesystem::path& cache_path, bool strict) {
  return std::make_shared<CachedBackend>(std::move(backend), std::make_shared<ReplayCache>(cache_path), strict);
}

}  // namespace dnagpt
