#include "dnagpt/benchmark.hpp"

#include "dnagpt/error.hpp"
#include "parallel.hpp"

namespace dnagpt {

std::vector<double> BenchmarkResult::scores(Label label) const {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (s.label == label && s.score) out.push_back(*s.score);
  }
  return out;
}

BenchmarkResult run_benchmark(const std::vector<LabeledSample>& dataset, Backend& backend,
                              const DetectionConfig& cfg, const BenchmarkOptions& opts) {
  cfg.validate();
  bool has_machine = false;
  bool has_human = false;
  for (const auto& s : dataset) (s.label == Label::kMachine ? has_machine : has_human) = true;
  if (!has_machine || !has_human) throw InvalidArgument("benchmark dataset needs both human and machine samples");

  DetectionConfig score_only = cfg;
  score_only.threshold.reset();
  score_only.record_timing = false;

  BenchmarkResult result;
  result.backend = backend.id();
  result.config = to_json(cfg);
  result.target_fpr = opts.target_fpr;
  result.samples.resize(dataset.size());
  detail::parallel_for(dataset.size(), opts.parallelism, [&](std::size_t i) {
    const auto& sample = dataset[i];
    auto& outcome = result.samples[i];
    outcome.id = sample.id;
    outcome.label = sample.label;
    try {
      outcome.score = detect(sample.text, backend, score_only, sample.prompt).score;
    } catch (const Error& e) {
      outcome.error = e.what();
    }
  });

  for (const auto& s : result.samples) {
    if (!s.score) ++result.excluded;
  }
  const auto machine = result.scores(Label::kMachine);
  const auto human = result.scores(Label::kHuman);
  result.n_machine = machine.size();
  result.n_human = human.size();
  if (machine.empty() || human.empty()) {
    throw Error("benchmark left a class empty after excluding " + std::to_string(result.excluded) +
                " failed samples");
  }
  result.auroc = auroc(machine, human);
  result.auroc_se = auroc_standard_error(result.auroc, machine.size(), human.size());
  result.at_target = tpr_at_fpr(machine, human, opts.target_fpr);
  result.decision_threshold = cfg.threshold.value_or(result.at_target.threshold);
  result.classification = classification_metrics(machine, human, result.decision_threshold);
  return result;
}

nlohmann::json to_json(const BenchmarkResult& r) {
  nlohmann::json samples = nlohmann::json::array();
  nlohmann::json exclusions = nlohmann::json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"id", s.id},
                       {"label", to_string(s.label)},
                       {"score", s.score ? nlohmann::json(*s.score) : nlohmann::json(nullptr)}});
    if (!s.error.empty()) exclusions.push_back({{"id", s.id}, {"error", s.error}});
  }
  const auto& c = r.classification;
  return {{"backend", r.backend},
          {"config", r.config},
          {"metrics",
           {{"auroc", r.auroc},
            {"auroc_se", r.auroc_se},
            {"target_fpr", r.target_fpr},
            {"tpr_at_target_fpr", r.at_target.tpr},
            {"threshold_at_target_fpr", r.at_target.threshold},
            {"achieved_fpr", r.at_target.achieved_fpr},
            {"decision_threshold", r.decision_threshold},
            {"f1", c.f1},
            {"accuracy", c.accuracy},
            {"tp", c.tp},
            {"fp", c.fp},
            {"tn", c.tn},
            {"fn", c.fn}}},
          {"counts", {{"machine", r.n_machine}, {"human", r.n_human}, {"excluded", r.excluded}}},
          {"exclusions", std::move(exclusions)},
          {"samples", std::move(samples)}};
}

}  // namespace dnagpt
