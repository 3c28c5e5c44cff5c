#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dnagpt/backend.hpp"
#include "dnagpt/pipeline.hpp"

namespace dnagpt {

// Tool configuration, read from JSON:
//   {
//     "backends": [ {"id": ..., "kind": "api"|"markov"|"replay", ...}, ... ],
//     "default_backend": "id",
//     "cache_path": "cache.jsonl",        // wraps every backend when set
//     "cache_strict": false,
//     "parallelism": 4,
//     "detection": { "gamma": 0.5, "k": 10, ... }
//   }
// Relative paths are resolved against the config file's directory.
struct AppConfig {
  std::vector<BackendDescriptor> backends;
  std::optional<std::string> default_backend;
  std::optional<std::filesystem::path> cache_path;
  bool cache_strict = false;
  int parallelism = 4;
  DetectionConfig detection;

  const BackendDescriptor& find(std::string_view id) const;  // UnknownBackendError
};

AppConfig app_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
AppConfig load_app_config(const std::filesystem::path& path);

BackendDescriptor backend_descriptor_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const BackendDescriptor& desc);

// Instantiates a configured backend. Markov models are loaded from model_path;
// replay backends read cache_path. When the config has a cache_path, the
// backend is wrapped in a CachedBackend.
BackendPtr make_backend(const AppConfig& config, std::string_view id);

}  // namespace dnagpt
