#include "dnagpt/config.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "dnagpt/error.hpp"
#include "dnagpt/markov_backend.hpp"
#include "dnagpt/openai_backend.hpp"
#include "dnagpt/replay_cache.hpp"

namespace dnagpt {
namespace {

std::string resolve(const std::string& p, const std::filesystem::path& base_dir) {
  if (p.empty() || base_dir.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base_dir / path).lexically_normal().string();
}

// One ReplayCache per file, so backends sharing a cache never interleave
// partial writes from separate streams.
std::shared_ptr<ReplayCache> shared_cache(const std::filesystem::path& path) {
  static std::mutex mu;
  static std::map<std::string, std::weak_ptr<ReplayCache>> open;
  const std::string key = std::filesystem::absolute(path).lexically_normal().string();
  std::lock_guard lock(mu);
  if (auto existing = open[key].lock()) return existing;
  auto cache = std::make_shared<ReplayCache>(path);
  open[key] = cache;
  return cache;
}

}  // namespace

const BackendDescriptor& AppConfig::find(std::string_view id) const {
  for (const auto& b : backends) {
    if (b.id == id) return b;
  }
  throw UnknownBackendError("unknown backend '" + std::string(id) + "'");
}

BackendDescriptor backend_descriptor_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("backend entry must be an object");
  BackendDescriptor d;
  d.id = j.at("id").get<std::string>();
  if (d.id.empty()) throw InvalidArgument("backend id must be non-empty");
  d.kind = parse_backend_kind(j.at("kind").get<std::string>());
  switch (d.kind) {
    case BackendKind::kApi:
      d.capabilities = {true, false};
      break;
    case BackendKind::kMarkov:
      d.capabilities = {true, true};
      break;
    case BackendKind::kReplay:
      d.capabilities = {true, false};
      break;
  }
  if (j.contains("can_score")) d.capabilities.can_score = j["can_score"].get<bool>();
  d.base_url = j.value("base_url", "");
  d.model = j.value("model", "");
  d.completions_model = j.value("completions_model", "");
  d.api_key_env = j.value("api_key_env", "");
  d.supports_n = j.value("supports_n", true);
  d.parallelism = j.value("parallelism", 4);
  d.model_path = resolve(j.value("model_path", ""), base_dir);
  d.cache_path = resolve(j.value("cache_path", ""), base_dir);
  d.source_id = j.value("source_id", "");
  d.strict = j.value("strict", false);

  if (d.parallelism < 1) throw InvalidArgument("backend '" + d.id + "': parallelism must be >= 1");
  if (d.kind == BackendKind::kApi && (d.base_url.empty() || d.model.empty())) {
    throw InvalidArgument("api backend '" + d.id + "' needs base_url and model");
  }
  if (d.kind == BackendKind::kMarkov && d.model_path.empty()) {
    throw InvalidArgument("markov backend '" + d.id + "' needs model_path");
  }
  if (d.kind == BackendKind::kReplay && d.cache_path.empty()) {
    throw InvalidArgument("replay backend '" + d.id + "' needs cache_path");
  }
  return d;
}

nlohmann::json to_json(const BackendDescriptor& d) {
  nlohmann::json j{{"id", d.id}, {"kind", to_string(d.kind)}, {"can_score", d.capabilities.can_score}};
  if (!d.base_url.empty()) j["base_url"] = d.base_url;
  if (!d.model.empty()) j["model"] = d.model;
  if (!d.completions_model.empty()) j["completions_model"] = d.completions_model;
  if (!d.api_key_env.empty()) j["api_key_env"] = d.api_key_env;
  if (d.kind == BackendKind::kApi) {
    j["supports_n"] = d.supports_n;
    j["parallelism"] = d.parallelism;
  }
  if (!d.model_path.empty()) j["model_path"] = d.model_path;
  if (!d.cache_path.empty()) j["cache_path"] = d.cache_path;
  if (!d.source_id.empty()) j["source_id"] = d.source_id;
  if (d.strict) j["strict"] = true;
  return j;
}

AppConfig app_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  AppConfig c;
  for (const auto& b : j.value("backends", nlohmann::json::array())) {
    auto d = backend_descriptor_from_json(b, base_dir);
    for (const auto& existing : c.backends) {
      if (existing.id == d.id) throw InvalidArgument("duplicate backend id '" + d.id + "'");
    }
    c.backends.push_back(std::move(d));
  }
  if (j.contains("default_backend")) {
    c.default_backend = j["default_backend"].get<std::string>();
    c.find(*c.default_backend);
  }
  if (j.contains("cache_path")) c.cache_path = resolve(j["cache_path"].get<std::string>(), base_dir);
  c.cache_strict = j.value("cache_strict", false);
  c.parallelism = j.value("parallelism", 4);
  if (c.parallelism < 1) throw InvalidArgument("parallelism must be >= 1");
  if (j.contains("detection")) c.detection = detection_config_from_json(j["detection"]);
  c.detection.validate();
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed config " + path.string() + ": " + e.what());
  }
  return app_config_from_json(j, path.parent_path());
}

BackendPtr make_backend(const AppConfig& config, std::string_view id) {
  const BackendDescriptor& d = config.find(id);
  BackendPtr backend;
  switch (d.kind) {
    case BackendKind::kMarkov:
      backend = std::make_shared<MarkovBackend>(d.id, std::make_shared<const MarkovLM>(MarkovLM::load(d.model_path)));
      break;
    case BackendKind::kApi:
      backend = std::make_shared<OpenAIBackend>(d);
      break;
    case BackendKind::kReplay:
      // Already a cache; never wrapped a second time.
      return std::make_shared<CachedBackend>(d, shared_cache(d.cache_path));
  }
  if (!d.cache_path.empty()) {
    return std::make_shared<CachedBackend>(std::move(backend), shared_cache(d.cache_path), d.strict);
  }
  if (config.cache_path) {
    return std::make_shared<CachedBackend>(std::move(backend), shared_cache(*config.cache_path), config.cache_strict);
  }
  return backend;
}

}  // namespace dnagpt
