#include "dnagpt/backend.hpp"

#include <cmath>
#include <cstdio>

#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"

namespace dnagpt {
namespace {

std::string exact_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void GenerationParams::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw InvalidArgument("temperature must be >= 0");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
  if (num_samples < 1) throw InvalidArgument("num_samples must be >= 1");
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "api") return BackendKind::kApi;
  if (name == "markov") return BackendKind::kMarkov;
  if (name == "replay") return BackendKind::kReplay;
  throw InvalidArgument("unknown backend kind: " + std::string(name));
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kApi: return "api";
    case BackendKind::kMarkov: return "markov";
    case BackendKind::kReplay: return "replay";
  }
  return "?";
}

std::string GenerationRequest::cache_key(std::string_view backend_id, int index) const {
  // num_samples is deliberately not part of the key: continuation k of a
  // K=10 request is interchangeable with continuation k of a K=5 request.
  Fnv1a h;
  h.field(backend_id).field("generate").field(prefix);
  h.update(prompt ? 1u : 0u).field(prompt.value_or(""));
  h.field(exact_double(params.temperature)).update(static_cast<std::uint64_t>(params.max_tokens));
  h.update(params.seed ? 1u : 0u).update(params.seed.value_or(0));
  h.update(params.system_prompt ? 1u : 0u).field(params.system_prompt.value_or(""));
  h.update(params.user_prompt_template ? 1u : 0u).field(params.user_prompt_template.value_or(""));
  h.update(static_cast<std::uint64_t>(index));
  return to_hex(h.digest());
}

std::vector<Continuation> generate_continuations(Backend& backend, std::string_view prefix, int k,
                                                 const GenerationParams& params,
                                                 std::optional<std::string> prompt) {
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (!backend.descriptor().capabilities.can_generate) {
    throw CapabilityError("backend '" + backend.id() + "' cannot generate");
  }
  GenerationRequest request{std::string(prefix), std::move(prompt), params};
  request.params.num_samples = k;
  request.params.validate();
  auto out = backend.generate(request);
  if (out.size() != static_cast<std::size_t>(k)) {
    throw PartialResultsError("backend '" + backend.id() + "' returned " + std::to_string(out.size()) +
                              " of " + std::to_string(k) + " continuations");
  }
  return out;
}

double score_continuation(Backend& backend, std::string_view prefix, std::string_view continuation) {
  if (!backend.can_score()) {
    throw CapabilityError("backend '" + backend.id() + "' is black-box and cannot score continuations");
  }
  const double lp = backend.score(prefix, continuation);
  if (!std::isfinite(lp)) throw Error("backend '" + backend.id() + "' returned a non-finite log-probability");
  return lp;
}

std::string render_template(std::string_view tmpl, std::string_view prefix, std::string_view prompt) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 8, "{prefix}") == 0) {
      out += prefix;
      i += 8;
    } else if (tmpl.compare(i, 8, "{prompt}") == 0) {
      out += prompt;
      i += 8;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

nlohmann::json to_json(const GenerationParams& p) {
  nlohmann::json j{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"num_samples", p.num_samples}};
  j["seed"] = p.seed ? nlohmann::json(*p.seed) : nlohmann::json(nullptr);
  if (p.system_prompt) j["system_prompt"] = *p.system_prompt;
  if (p.user_prompt_template) j["user_prompt_template"] = *p.user_prompt_template;
  return j;
}

GenerationParams generation_params_from_json(const nlohmann::json& j) {
  GenerationParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.num_samples = j.value("num_samples", p.num_samples);
  if (j.contains("seed") && !j["seed"].is_null()) p.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("system_prompt")) p.system_prompt = j["system_prompt"].get<std::string>();
  if (j.contains("user_prompt_template")) p.user_prompt_template = j["user_prompt_template"].get<std::string>();
  p.validate();
  return p;
}

}  // namespace dnagpt
