#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "dnagpt/backend.hpp"

namespace dnagpt {

// Append-only JSONL store of backend responses, one record per line:
//   {"key": <hex>, "backend": <id>, "kind": "generate"|"score", "index": k,
//    "response": {"text": ..., "logprob": ...}}
// The first record for a key wins; a later record with the same key and a
// different response is reported as corruption.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path path);

  std::optional<Continuation> lookup(const std::string& key) const;
  void record(const std::string& key, std::string_view backend_id, std::string_view kind, int index,
              const Continuation& response);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Continuation> entries_;
  std::ofstream out_;
};

// Wraps a backend so that responses are replayed from, and recorded to, a
// cache file. With no inner backend (pure replay) or in strict mode a miss is
// an error naming the request hash.
class CachedBackend final : public Backend {
 public:
  CachedBackend(BackendPtr inner, std::shared_ptr<ReplayCache> cache, bool strict = false);
  // Pure replay of records produced by backend `source_id`.
  CachedBackend(BackendDescriptor desc, std::shared_ptr<ReplayCache> cache);

  const BackendDescriptor& descriptor() const override { return desc_; }
  std::vector<Continuation> generate(const GenerationRequest& request) override;
  double score(std::string_view prefix, std::string_view continuation) override;

  std::size_t inner_calls() const noexcept { return inner_calls_; }

 private:
  const std::string& key_id() const { return desc_.source_id.empty() ? desc_.id : desc_.source_id; }

  BackendDescriptor desc_;
  BackendPtr inner_;
  std::shared_ptr<ReplayCache> cache_;
  bool strict_;
  std::atomic<std::size_t> inner_calls_{0};
};

BackendPtr cached(BackendPtr backend, const std::filesystem::path& cache_path, bool strict = false);

std::string score_cache_key(std::string_view backend_id, std::string_view prefix,
                            std::string_view continuation);

}  // namespace dnagpt
