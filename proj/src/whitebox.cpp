#include "dnagpt/whitebox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dnagpt/error.hpp"

namespace dnagpt {
namespace {

double normalized(const ScoredContinuation& c, bool per_token) {
  if (!per_token) return c.logprob;
  return c.text.empty() ? 0.0 : c.logprob / static_cast<double>(c.text.size());
}

double mean_logprob(std::span<const ScoredContinuation> xs) {
  double sum = 0.0;
  for (const auto& x : xs) {
    if (!std::isfinite(x.logprob)) throw InvalidArgument("non-finite log-probability");
    sum += x.logprob;
  }
  return sum / static_cast<double>(xs.size());
}

}  // namespace

void ScoredContinuation::validate() const {
  if (!std::isfinite(logprob)) throw InvalidArgument("log-probability must be finite");
  if (logprob > 0.0) throw InvalidArgument("log-probability must be <= 0");
  if (per_token_logprobs) {
    const double sum = std::accumulate(per_token_logprobs->begin(), per_token_logprobs->end(), 0.0);
    if (std::abs(sum - logprob) > 1e-9) {
      throw InvalidArgument("per-token log-probabilities do not sum to the sequence log-probability");
    }
  }
}

double wscore(const ScoredContinuation& y0, std::span<const ScoredContinuation> omega,
              const WScoreOptions& opts) {
  if (omega.empty()) throw InvalidArgument("regeneration set must not be empty");
  if (!std::isfinite(y0.logprob)) throw InvalidArgument("non-finite log-probability for Y0");
  double sum = 0.0;
  for (const auto& yk : omega) {
    if (!std::isfinite(yk.logprob)) throw InvalidArgument("non-finite log-probability in regeneration set");
    sum += normalized(yk, opts.per_token_normalized);
  }
  return normalized(y0, opts.per_token_normalized) - sum / static_cast<double>(omega.size());
}

double estimate_likelihood_gap(std::span<const ScoredContinuation> machine_samples,
                               std::span<const ScoredContinuation> human_samples) {
  if (machine_samples.empty() || human_samples.empty()) {
    throw InvalidArgument("likelihood gap needs machine and human samples");
  }
  return mean_logprob(machine_samples) - mean_logprob(human_samples);
}

void HypothesisParams::validate() const {
  if (!(gap > 0.0)) throw InvalidArgument("gap must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(failure_prob > 0.0 && failure_prob < 1.0)) throw InvalidArgument("failure probability must be in (0, 1)");
  if (!(constant > 0.0)) throw InvalidArgument("constant must be positive");
}

int recommended_k(const HypothesisParams& params) {
  params.validate();
  const double raw = params.constant * params.sigma * std::log(1.0 / params.failure_prob) /
                     (params.gap * params.gap);
  // Absorb rounding noise so that exact integers (e.g. 1.0000000000000002) do
  // not round up.
  const double k = std::ceil(raw - 1e-9);
  if (k > 1e9) throw InvalidArgument("recommended K overflows; gap too small");
  return k < 1.0 ? 1 : static_cast<int>(k);
}

double tv_from_kl(double d_kl) {
  if (!(d_kl >= 0.0)) throw InvalidArgument("KL divergence must be nonnegative");
  return std::min(1.0, std::sqrt(d_kl / 2.0));
}

double auroc_upper_bound(double d_tv) {
  if (!(d_tv >= 0.0 && d_tv <= 1.0)) throw InvalidArgument("total variation must be in [0, 1]");
  return 0.5 + d_tv - d_tv * d_tv / 2.0;
}

DivergenceBounds bounds_from_kl(double d_kl) {
  DivergenceBounds b;
  b.d_kl = d_kl;
  b.d_tv = tv_from_kl(d_kl);
  b.auroc_bound = auroc_upper_bound(b.d_tv);
  return b;
}

}  // namespace dnagpt
