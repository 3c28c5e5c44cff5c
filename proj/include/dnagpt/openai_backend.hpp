#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

#include "dnagpt/backend.hpp"

namespace dnagpt {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubled after each attempt
};

// Client for OpenAI-compatible HTTP APIs.
//
// Generation: POST {base_url}/v1/chat/completions with model, messages,
// temperature, max_tokens and n; continuations come from
// choices[i].message.content. When the server returns fewer than n choices (or
// supports_n is false) the remainder is fetched with n=1 requests, at most
// `parallelism` in flight.
//
// Scoring (when capabilities.can_score): POST {base_url}/v1/completions with
// the prefix and continuation echoed back (max_tokens=0, echo=true,
// logprobs=1); the log-probability is the sum of token_logprobs whose
// text_offset falls inside the continuation.
//
// Connection failures, 429 and 5xx are retried with exponential backoff; any
// other status fails immediately.
class OpenAIBackend final : public Backend {
 public:
  explicit OpenAIBackend(BackendDescriptor desc, RetryPolicy retry = {});

  const BackendDescriptor& descriptor() const override { return desc_; }
  std::vector<Continuation> generate(const GenerationRequest& request) override;
  double score(std::string_view prefix, std::string_view continuation) override;

  // Request bodies, exposed for tests.
  nlohmann::json chat_body(const GenerationRequest& request, int n) const;
  nlohmann::json completions_body(std::string_view prefix, std::string_view continuation) const;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  std::vector<std::string> parse_choices(const nlohmann::json& response) const;

  BackendDescriptor desc_;
  RetryPolicy retry_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // any path component of base_url
};

// Joins prefix and continuation the way completions_body does and returns the
// character offset where the continuation's tokens begin.
std::size_t continuation_boundary(std::string_view prefix);

}  // namespace dnagpt
