#include "dnagpt/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "dnagpt/error.hpp"

namespace dnagpt {

Label parse_label(std::string_view name) {
  if (name == "human") return Label::kHuman;
  if (name == "machine") return Label::kMachine;
  throw InvalidArgument("unknown label: " + std::string(name) + " (expected human or machine)");
}

std::string_view to_string(Label label) { return label == Label::kHuman ? "human" : "machine"; }

nlohmann::json to_json(const LabeledSample& s) {
  nlohmann::json j{{"id", s.id}, {"text", s.text}, {"label", to_string(s.label)}};
  if (s.prompt) j["prompt"] = *s.prompt;
  if (s.source_model) j["source_model"] = *s.source_model;
  return j;
}

LabeledSample labeled_sample_from_json(const nlohmann::json& j) {
  LabeledSample s;
  s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  s.text = j.at("text").get<std::string>();
  s.label = parse_label(j.at("label").get<std::string>());
  if (j.contains("prompt") && !j["prompt"].is_null()) s.prompt = j["prompt"].get<std::string>();
  if (j.contains("source_model") && !j["source_model"].is_null()) s.source_model = j["source_model"].get<std::string>();
  if (s.text.empty()) throw InvalidArgument("sample '" + s.id + "' has empty text");
  return s;
}

std::vector<LabeledSample> read_dataset(std::istream& in) {
  std::vector<LabeledSample> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      LabeledSample s = labeled_sample_from_json(nlohmann::json::parse(line));
      if (!ids.insert(s.id).second) throw InvalidArgument("duplicate sample id '" + s.id + "'");
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read dataset " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<LabeledSample>& samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const std::vector<LabeledSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, samples);
}

}  // namespace dnagpt
