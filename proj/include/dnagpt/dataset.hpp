#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dnagpt {

enum class Label { kHuman, kMachine };
Label parse_label(std::string_view name);
std::string_view to_string(Label label);

struct LabeledSample {
  std::string id;
  std::string text;
  Label label = Label::kHuman;
  std::optional<std::string> prompt;
  std::optional<std::string> source_model;
};

nlohmann::json to_json(const LabeledSample& s);
LabeledSample labeled_sample_from_json(const nlohmann::json& j);

// JSONL, one sample per line. Ids must be unique and texts non-empty.
std::vector<LabeledSample> read_dataset(std::istream& in);
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const std::vector<LabeledSample>& samples);
void save_dataset(const std::filesystem::path& path, const std::vector<LabeledSample>& samples);

}  // namespace dnagpt
