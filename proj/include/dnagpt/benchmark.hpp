#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnagpt/backend.hpp"
#include "dnagpt/dataset.hpp"
#include "dnagpt/metrics.hpp"
#include "dnagpt/pipeline.hpp"

namespace dnagpt {

struct BenchmarkOptions {
  double target_fpr = 0.01;
  int parallelism = 4;
};

struct SampleOutcome {
  std::string id;
  Label label = Label::kHuman;
  std::optional<double> score;
  std::string error;  // non-empty when the sample was excluded
};

struct BenchmarkResult {
  std::string backend;
  nlohmann::json config;
  double target_fpr = 0.01;
  double auroc = 0.5;
  double auroc_se = 0.0;
  TprAtFpr at_target;
  double decision_threshold = 0.0;  // configured threshold, else the calibrated one
  ClassificationMetrics classification;
  std::size_t n_machine = 0;
  std::size_t n_human = 0;
  std::size_t excluded = 0;
  std::vector<SampleOutcome> samples;

  std::vector<double> scores(Label label) const;
};

// Scores every sample with detect (the verdict is ignored) and computes AUROC,
// TPR at the target FPR, and F1/accuracy. Samples whose backend calls fail are
// excluded and counted; the run fails if either class ends up empty.
BenchmarkResult run_benchmark(const std::vector<LabeledSample>& dataset, Backend& backend,
                              const DetectionConfig& cfg, const BenchmarkOptions& opts = {});

nlohmann::json to_json(const BenchmarkResult& result);

}  // namespace dnagpt
