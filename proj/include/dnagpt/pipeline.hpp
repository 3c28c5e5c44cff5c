#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dnagpt/backend.hpp"
#include "dnagpt/ngram.hpp"
#include "dnagpt/tokenizer.hpp"

namespace dnagpt {

// Prefix X and remainder Y0 of a candidate text.
struct SplitText {
  double gamma = 0.5;
  std::size_t split_index = 0;  // |X|
  TokenSequence prefix;
  TokenSequence remainder;
};

// X = first ceil(gamma * L) tokens, clamped to [1, L-1] so both parts are
// non-empty. Requires L >= 2 and 0 < gamma < 1.
SplitText truncate(const TokenSequence& seq, double gamma);

enum class ScoreMode { kBlack, kWhite };
ScoreMode parse_score_mode(std::string_view name);
std::string_view to_string(ScoreMode mode);

enum class Verdict { kMachine, kHuman, kUndecided };
Verdict parse_verdict(std::string_view name);
std::string_view to_string(Verdict verdict);

inline constexpr std::string_view kAnswerSystemPrompt =
    "You are a helpful assistant that answers the question provided.";
inline constexpr std::string_view kAnswerUserTemplate =
    "Answer the following question in 180-300 words: {prompt}\n{prefix}";
inline constexpr std::string_view kContinueSystemPrompt =
    "You are a helpful assistant that continues the sentences provided.";
inline constexpr std::string_view kContinueUserTemplate =
    "Complete the following sentences for a total of around 250 words: {prefix}";

struct DetectionConfig {
  double gamma = 0.5;
  int k = 10;
  ScoreMode mode = ScoreMode::kBlack;
  ScoreConfig score;
  GenerationParams generation;
  std::optional<double> threshold;
  // Use the question prompt, when one is supplied, in the regeneration
  // request. Otherwise the bare continuation template is used.
  bool prompt_known = false;
  TokenizeMode tokenize = TokenizeMode::kWhitespaceLower;
  // Regenerations are requested with, and clipped to, ceil((1 + slack) |Y0|)
  // tokens (black mode). White mode clips them to |Y0| so that
  // log-likelihoods cover equally long spans.
  double length_slack = 0.2;
  bool wscore_per_token = false;
  bool record_timing = false;

  void validate() const;
};

nlohmann::json to_json(const DetectionConfig& cfg);
DetectionConfig detection_config_from_json(const nlohmann::json& j, DetectionConfig base = {});

struct RegenerationDiagnostic {
  int index = 0;  // 1-based
  std::string text;
  std::size_t tokens_used = 0;
  std::optional<double> logprob;
  std::optional<double> score_term;  // this regeneration's BScore alone (black)
};

struct DetectionReport {
  Verdict verdict = Verdict::kUndecided;
  double score = 0.0;
  ScoreMode mode = ScoreMode::kBlack;
  std::optional<double> threshold;
  double gamma = 0.5;
  int k = 0;
  std::string backend;

  std::string prefix_text;
  std::string y0_text;
  std::size_t token_count = 0;
  std::size_t split_index = 0;

  std::vector<EvidenceItem> evidence;
  std::size_t evidence_total = 0;
  bool evidence_truncated = false;

  std::map<int, double> per_n_terms;  // black
  std::optional<double> y0_logprob;   // white
  std::vector<RegenerationDiagnostic> regenerations;
  std::optional<double> timing_ms;
};

nlohmann::json to_json(const DetectionReport& report);
DetectionReport detection_report_from_json(const nlohmann::json& j);

// machine iff score > threshold; undecided without a threshold.
Verdict decide(double score, std::optional<double> threshold);

// Truncate, regenerate K continuations of X, score Y0 against them, and
// threshold the score.
DetectionReport detect(std::string_view text, Backend& backend, const DetectionConfig& cfg,
                       std::optional<std::string> prompt = std::nullopt);

struct WindowResult {
  std::size_t index = 0;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  Verdict verdict = Verdict::kUndecided;
  std::optional<DetectionReport> report;
  std::string reason;  // why the window was skipped
};

struct SlidingWindowResult {
  std::vector<WindowResult> windows;
  Verdict aggregate = Verdict::kUndecided;
};

// Splits the tokens into window_count contiguous parts (remainder to the last)
// and runs detect on each. The text is machine iff any window is machine.
SlidingWindowResult sliding_window_detect(std::string_view text, Backend& backend, const DetectionConfig& cfg,
                                          int window_count);

nlohmann::json to_json(const SlidingWindowResult& result);

struct SourcingEntry {
  std::string backend;
  double score = 0.0;
};

struct SourcingFailure {
  std::string backend;
  std::string error;
};

struct SourcingReport {
  std::vector<SourcingEntry> ranked;  // descending score
  std::string winner;
  std::vector<SourcingFailure> failures;
  bool normalized = false;
};

struct SourcingOptions {
  // Experimental: per-backend (mean, stddev) of reference scores. When set,
  // candidates are ranked by z-score instead of raw score.
  std::map<std::string, std::pair<double, double>> normalization;
};

// Runs detect against every candidate with the same configuration and ranks
// by score. Ties keep candidate order. Fails if fewer than two succeed.
SourcingReport model_sourcing(std::string_view text, std::span<const BackendPtr> candidates,
                              const DetectionConfig& cfg, const SourcingOptions& opts = {});

nlohmann::json to_json(const SourcingReport& report);

}  // namespace dnagpt
