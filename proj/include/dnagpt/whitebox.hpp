#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dnagpt/tokenizer.hpp"

namespace dnagpt {

// A continuation together with its natural-log conditional probability
// log p(Y | X) under some model.
struct ScoredContinuation {
  TokenSequence text;
  double logprob = 0.0;
  std::optional<std::vector<double>> per_token_logprobs;

  // Throws InvalidArgument if logprob is non-finite or positive, or if the
  // per-token values do not sum to logprob within 1e-9.
  void validate() const;
};

struct WScoreOptions {
  // Divide each log-likelihood by its token count before comparing.
  // Experimental; the default compares raw sequence log-likelihoods.
  bool per_token_normalized = false;
};

// (1/K) sum_k log(p(Y0|X) / p(Yk|X)) = logprob(Y0) - mean_k logprob(Yk).
// Computed entirely in log space.
double wscore(const ScoredContinuation& y0, std::span<const ScoredContinuation> omega,
              const WScoreOptions& opts = {});

// Empirical likelihood gap: mean machine log-likelihood minus mean human
// log-likelihood. Positive under the likelihood-gap hypothesis.
double estimate_likelihood_gap(std::span<const ScoredContinuation> machine_samples,
                               std::span<const ScoredContinuation> human_samples);

struct HypothesisParams {
  double gap = 1.0;             // Delta > 0
  double sigma = 1.0;           // sub-Gaussian parameter > 0
  double failure_prob = 0.05;   // delta in (0, 1)
  double constant = 1.0;        // c in the big-Omega bound

  void validate() const;
};

// Number of re-generations sufficient to separate the two hypotheses with
// probability 1 - delta: ceil(c * sigma * ln(1/delta) / gap^2), at least 1.
// Advisory; c has to be calibrated empirically.
int recommended_k(const HypothesisParams& params);

// Pinsker: d_TV <= sqrt(d_KL / 2), capped at 1.
double tv_from_kl(double d_kl);

// LeCam-style ceiling on the AUROC of any detector: 1/2 + d_TV - d_TV^2 / 2.
double auroc_upper_bound(double d_tv);

struct DivergenceBounds {
  double d_tv = 0.0;
  double d_kl = 0.0;
  double auroc_bound = 0.5;
};

// Bounds implied by a KL divergence: d_tv from Pinsker and the AUROC ceiling
// at that d_tv.
DivergenceBounds bounds_from_kl(double d_kl);

}  // namespace dnagpt
