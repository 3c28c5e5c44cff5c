#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dnagpt {

// Machine is the positive class; a score strictly above the threshold is
// flagged machine, a tie is not.

// P(machine score > human score) + 0.5 P(tie), i.e. the Mann-Whitney U
// statistic over all pairs.
double auroc(std::span<const double> machine_scores, std::span<const double> human_scores);

// Hanley-McNeil standard error of an AUROC estimate.
double auroc_standard_error(double auc, std::size_t n_machine, std::size_t n_human);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), from (0,0) to (1,1)
  double auroc = 0.5;                             // trapezoidal area
};

RocCurve roc_curve(std::span<const double> machine_scores, std::span<const double> human_scores);

struct TprAtFpr {
  double tpr = 0.0;
  double threshold = 0.0;
  double achieved_fpr = 0.0;
};

// Smallest threshold whose false-positive rate on human_scores is <= target,
// and the TPR it achieves.
TprAtFpr tpr_at_fpr(std::span<const double> machine_scores, std::span<const double> human_scores,
                    double target_fpr);

struct ClassificationMetrics {
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t fn = 0;
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
};

ClassificationMetrics classification_metrics(std::span<const double> machine_scores,
                                             std::span<const double> human_scores, double threshold);

struct CalibrationResult {
  double threshold = 0.0;
  double achieved_fpr = 0.0;
  double target_fpr = 0.0;
  std::size_t n_human = 0;
  std::string warning;  // set when there are fewer than 1/target scores
};

CalibrationResult calibrate(std::span<const double> human_scores, double target_fpr);

}  // namespace dnagpt
