#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dnagpt {

struct GenerationParams {
  double temperature = 0.7;
  int max_tokens = 300;
  int num_samples = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> system_prompt;
  // May contain "{prefix}" and "{prompt}" placeholders.
  std::optional<std::string> user_prompt_template;

  void validate() const;
};

enum class BackendKind { kApi, kMarkov, kReplay };

BackendKind parse_backend_kind(std::string_view name);
std::string_view to_string(BackendKind kind);

struct Capabilities {
  bool can_generate = true;
  bool can_score = false;
};

// Static description of a backend, as read from configuration. Credentials are
// never stored here: api_key_env names the environment variable to read at
// request time.
struct BackendDescriptor {
  std::string id;
  BackendKind kind = BackendKind::kMarkov;
  Capabilities capabilities;

  // api
  std::string base_url;
  std::string model;
  std::string completions_model;  // white-box scoring model; defaults to model
  std::string api_key_env;
  bool supports_n = true;
  int parallelism = 4;

  // markov
  std::string model_path;

  // replay / cached
  std::string cache_path;
  std::string source_id;  // id whose records a replay backend serves
  bool strict = false;
};

struct GenerationRequest {
  std::string prefix;
  std::optional<std::string> prompt;
  GenerationParams params;

  // Cache identity of continuation `index` for the given backend id.
  std::string cache_key(std::string_view backend_id, int index) const;
};

struct Continuation {
  std::string text;
  std::optional<double> logprob;

  friend bool operator==(const Continuation&, const Continuation&) = default;
};

// A text-generation provider. Implementations must tolerate concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;

  // Exactly params.num_samples continuations of prefix.
  virtual std::vector<Continuation> generate(const GenerationRequest& request) = 0;

  // Natural-log log p(continuation | prefix).
  virtual double score(std::string_view prefix, std::string_view continuation) = 0;

  const std::string& id() const { return descriptor().id; }
  bool can_score() const { return descriptor().capabilities.can_score; }
};

using BackendPtr = std::shared_ptr<Backend>;

// Checked entry points: validate arguments and capabilities, and guarantee the
// continuation count.
std::vector<Continuation> generate_continuations(Backend& backend, std::string_view prefix, int k,
                                                 const GenerationParams& params,
                                                 std::optional<std::string> prompt = std::nullopt);

double score_continuation(Backend& backend, std::string_view prefix, std::string_view continuation);

// Substitutes "{prefix}" and "{prompt}" in a template.
std::string render_template(std::string_view tmpl, std::string_view prefix, std::string_view prompt);

nlohmann::json to_json(const GenerationParams& params);
GenerationParams generation_params_from_json(const nlohmann::json& j);

}  // namespace dnagpt
