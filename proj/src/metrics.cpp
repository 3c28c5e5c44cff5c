#include "dnagpt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dnagpt/error.hpp"

namespace dnagpt {
namespace {

void require_scores(std::span<const double> machine, std::span<const double> human) {
  if (machine.empty() || human.empty()) throw InvalidArgument("need at least one machine and one human score");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(machine.begin(), machine.end(), finite) || !std::all_of(human.begin(), human.end(), finite)) {
    throw InvalidArgument("scores must be finite");
  }
}

// Threshold such that at most `allowed` human scores lie strictly above it.
double threshold_for(std::vector<double> human_desc, std::size_t allowed, double floor_value) {
  if (allowed >= human_desc.size()) return std::nextafter(floor_value, -INFINITY);
  return human_desc[allowed];
}

std::size_t allowed_false_positives(double target_fpr, std::size_t n_human) {
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) throw InvalidArgument("target FPR must be in [0, 1]");
  return static_cast<std::size_t>(std::floor(target_fpr * static_cast<double>(n_human) + 1e-9));
}

std::size_t count_above(std::span<const double> xs, double t) {
  return static_cast<std::size_t>(std::count_if(xs.begin(), xs.end(), [t](double x) { return x > t; }));
}

}  // namespace

double auroc(std::span<const double> machine_scores, std::span<const double> human_scores) {
  require_scores(machine_scores, human_scores);
  // 2U counted exactly: 2 per win, 1 per tie, via a merge over sorted lists.
  std::vector<double> m(machine_scores.begin(), machine_scores.end());
  std::vector<double> h(human_scores.begin(), human_scores.end());
  std::sort(m.begin(), m.end());
  std::sort(h.begin(), h.end());
  double twice_u = 0.0;
  std::size_t below = 0;
  std::size_t upto = 0;  // humans <= current machine score
  for (double x : m) {
    while (below < h.size() && h[below] < x) ++below;
    if (upto < below) upto = below;
    while (upto < h.size() && h[upto] <= x) ++upto;
    twice_u += 2.0 * static_cast<double>(below) + static_cast<double>(upto - below);
  }
  const double twice_pairs = 2.0 * static_cast<double>(m.size()) * static_cast<double>(h.size());
  // Evaluate the smaller side directly so that auroc(a,b) + auroc(b,a) == 1
  // holds exactly in floating point.
  if (2.0 * twice_u > twice_pairs) return 1.0 - (twice_pairs - twice_u) / twice_pairs;
  return twice_u / twice_pairs;
}

double auroc_standard_error(double auc, std::size_t n_machine, std::size_t n_human) {
  if (n_machine == 0 || n_human == 0) throw InvalidArgument("standard error needs non-empty classes");
  const double q1 = auc / (2.0 - auc);
  const double q2 = 2.0 * auc * auc / (1.0 + auc);
  const double nm = static_cast<double>(n_machine);
  const double nh = static_cast<double>(n_human);
  const double var = (auc * (1.0 - auc) + (nm - 1.0) * (q1 - auc * auc) + (nh - 1.0) * (q2 - auc * auc)) / (nm * nh);
  return std::sqrt(std::max(0.0, var));
}

RocCurve roc_curve(std::span<const double> machine_scores, std::span<const double> human_scores) {
  require_scores(machine_scores, human_scores);
  std::vector<std::pair<double, bool>> all;  // (score, is_machine)
  all.reserve(machine_scores.size() + human_scores.size());
  for (double x : machine_scores) all.emplace_back(x, true);
  for (double x : human_scores) all.emplace_back(x, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const double nm = static_cast<double>(machine_scores.size());
  const double nh = static_cast<double>(human_scores.size());
  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    const double v = all[i].first;
    for (; i < all.size() && all[i].first == v; ++i) (all[i].second ? tp : fp) += 1;
    const auto [x0, y0] = curve.points.back();
    const double x1 = static_cast<double>(fp) / nh;
    const double y1 = static_cast<double>(tp) / nm;
    area += (x1 - x0) * (y0 + y1) / 2.0;
    curve.points.emplace_back(x1, y1);
  }
  curve.auroc = area;
  return curve;
}

TprAtFpr tpr_at_fpr(std::span<const double> machine_scores, std::span<const double> human_scores,
                    double target_fpr) {
  require_scores(machine_scores, human_scores);
  std::vector<double> desc(human_scores.begin(), human_scores.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  const double lowest = std::min(*std::min_element(machine_scores.begin(), machine_scores.end()), desc.back());
  TprAtFpr out;
  out.threshold = threshold_for(desc, allowed_false_positives(target_fpr, desc.size()), lowest);
  out.achieved_fpr = static_cast<double>(count_above(human_scores, out.threshold)) / static_cast<double>(desc.size());
  out.tpr = static_cast<double>(count_above(machine_scores, out.threshold)) /
            static_cast<double>(machine_scores.size());
  return out;
}

ClassificationMetrics classification_metrics(std::span<const double> machine_scores,
                                             std::span<const double> human_scores, double threshold) {
  require_scores(machine_scores, human_scores);
  ClassificationMetrics m;
  m.tp = count_above(machine_scores, threshold);
  m.fn = machine_scores.size() - m.tp;
  m.fp = count_above(human_scores, threshold);
  m.tn = human_scores.size() - m.fp;
  const double denom = 2.0 * static_cast<double>(m.tp) + static_cast<double>(m.fp + m.fn);
  m.f1 = denom > 0.0 ? 2.0 * static_cast<double>(m.tp) / denom : 0.0;
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(machine_scores.size() + human_scores.size());
  return m;
}

CalibrationResult calibrate(std::span<const double> human_scores, double target_fpr) {
  if (human_scores.empty()) throw InvalidArgument("calibration needs at least one human score");
  if (!std::all_of(human_scores.begin(), human_scores.end(), [](double x) { return std::isfinite(x); })) {
    throw InvalidArgument("scores must be finite");
  }
  std::vector<double> desc(human_scores.begin(), human_scores.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  CalibrationResult out;
  out.target_fpr = target_fpr;
  out.n_human = desc.size();
  out.threshold = threshold_for(desc, allowed_false_positives(target_fpr, desc.size()), desc.back());
  out.achieved_fpr = static_cast<double>(count_above(human_scores, out.threshold)) / static_cast<double>(desc.size());
  if (target_fpr > 0.0 && static_cast<double>(desc.size()) < 1.0 / target_fpr - 1e-9) {
    out.warning = "only " + std::to_string(desc.size()) + " human scores; at least " +
                  std::to_string(static_cast<long long>(std::ceil(1.0 / target_fpr - 1e-9))) +
                  " are needed to resolve the target FPR";
  }
  return out;
}

}  // namespace dnagpt
