#include "dnagpt/openai_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"
#include "parallel.hpp"

namespace dnagpt {
namespace {

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

std::string joined_prompt(std::string_view prefix, std::string_view continuation) {
  std::string out(prefix);
  if (!prefix.empty() && !continuation.empty() && !is_space(prefix.back()) && !is_space(continuation.front())) {
    out.push_back(' ');
  }
  out += continuation;
  return out;
}

}  // namespace

std::size_t continuation_boundary(std::string_view prefix) { return prefix.size(); }

OpenAIBackend::OpenAIBackend(BackendDescriptor desc, RetryPolicy retry)
    : desc_(std::move(desc)), retry_(retry) {
  desc_.kind = BackendKind::kApi;
  if (desc_.model.empty()) throw InvalidArgument("api backend '" + desc_.id + "' needs a model name");
  std::string url = desc_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("api backend '" + desc_.id + "': base_url must start with http:// or https://");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin_.rfind("https://", 0) == 0) {
    throw InvalidArgument("api backend '" + desc_.id + "': built without TLS support, cannot use " + origin_);
  }
#endif
}

nlohmann::json OpenAIBackend::chat_body(const GenerationRequest& request, int n) const {
  const auto& p = request.params;
  nlohmann::json messages = nlohmann::json::array();
  if (p.system_prompt) messages.push_back({{"role", "system"}, {"content", *p.system_prompt}});
  const std::string user = p.user_prompt_template
                               ? render_template(*p.user_prompt_template, request.prefix, request.prompt.value_or(""))
                               : request.prefix;
  messages.push_back({{"role", "user"}, {"content", user}});
  nlohmann::json body{{"model", desc_.model},
                      {"messages", std::move(messages)},
                      {"temperature", p.temperature},
                      {"max_tokens", p.max_tokens},
                      {"n", n}};
  if (p.seed) body["seed"] = *p.seed;
  return body;
}

nlohmann::json OpenAIBackend::completions_body(std::string_view prefix, std::string_view continuation) const {
  return {{"model", desc_.completions_model.empty() ? desc_.model : desc_.completions_model},
          {"prompt", joined_prompt(prefix, continuation)},
          {"max_tokens", 0},
          {"echo", true},
          {"logprobs", 1}};
}

nlohmann::json OpenAIBackend::post(const std::string& path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  const std::string request_id = to_hex(Fnv1a{}.field(desc_.id).field(path).field(payload).digest());

  httplib::Headers headers;
  if (!desc_.api_key_env.empty()) {
    const char* key = std::getenv(desc_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error("api backend '" + desc_.id + "': environment variable " + desc_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(origin_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    auto res = client.Post(path_prefix_ + path, headers, payload, "application/json");
    bool transient = false;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      transient = true;
    } else if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError("api backend '" + desc_.id + "': malformed JSON response to request " + request_id +
                                 ": " + e.what(),
                             request_id);
      }
    } else {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      transient = res->status == 429 || res->status >= 500;
    }
    if (!transient || attempt >= retry_.max_retries) {
      throw TransportError("api backend '" + desc_.id + "': request " + request_id + " to " + path + " failed after " +
                               std::to_string(attempt + 1) + " attempt(s): " + last_error,
                           request_id);
    }
    std::this_thread::sleep_for(retry_.initial_backoff * (1 << attempt));
  }
}

std::vector<std::string> OpenAIBackend::parse_choices(const nlohmann::json& response) const {
  std::vector<std::string> out;
  try {
    for (const auto& choice : response.at("choices")) {
      const auto& content = choice.at("message").at("content");
      out.push_back(content.is_null() ? std::string() : content.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("api backend '" + desc_.id + "': unexpected response shape: " + e.what(), "");
  }
  return out;
}

std::vector<Continuation> OpenAIBackend::generate(const GenerationRequest& request) {
  request.params.validate();
  const auto k = static_cast<std::size_t>(request.params.num_samples);
  std::vector<std::string> texts;
  if (desc_.supports_n) {
    texts = parse_choices(post("/v1/chat/completions", chat_body(request, static_cast<int>(k))));
    if (texts.size() > k) texts.resize(k);
  }
  if (texts.size() < k) {
    const std::size_t have = texts.size();
    texts.resize(k);
    detail::parallel_for(k - have, desc_.parallelism, [&](std::size_t i) {
      auto one = parse_choices(post("/v1/chat/completions", chat_body(request, 1)));
      if (one.empty()) throw TransportError("api backend '" + desc_.id + "' returned no choices", "");
      texts[have + i] = std::move(one.front());
    });
  }
  std::vector<Continuation> out;
  out.reserve(k);
  for (auto& t : texts) out.push_back({std::move(t), std::nullopt});
  return out;
}

double OpenAIBackend::score(std::string_view prefix, std::string_view continuation) {
  if (!desc_.capabilities.can_score) {
    throw CapabilityError("api backend '" + desc_.id + "' does not expose log-probabilities");
  }
  const auto response = post("/v1/completions", completions_body(prefix, continuation));
  const std::size_t boundary = continuation_boundary(prefix);
  try {
    const auto& lp = response.at("choices").at(0).at("logprobs");
    const auto& offsets = lp.at("text_offset");
    const auto& values = lp.at("token_logprobs");
    if (offsets.size() != values.size()) throw TransportError("logprobs arrays differ in length", "");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (offsets[i].get<std::size_t>() < boundary || values[i].is_null()) continue;
      sum += values[i].get<double>();
    }
    return sum;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("api backend '" + desc_.id + "': response lacks echoed logprobs: " + e.what(), "");
  }
}

}  // namespace dnagpt
