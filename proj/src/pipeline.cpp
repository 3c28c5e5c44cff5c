#include "dnagpt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dnagpt/error.hpp"
#include "dnagpt/whitebox.hpp"

namespace dnagpt {
namespace {

// ceil(x) that does not round 7.000000000000001 up to 8.
std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

std::vector<std::string> clip(const TokenSequence& seq, std::size_t limit) {
  const std::size_t n = std::min(limit, seq.size());
  return {seq.tokens.begin(), seq.tokens.begin() + static_cast<std::ptrdiff_t>(n)};
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

SplitText truncate(const TokenSequence& seq, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("truncation ratio must be in (0, 1)");
  const std::size_t len = seq.size();
  if (len < 2) throw InvalidArgument("text needs at least 2 tokens to be split, got " + std::to_string(len));
  const std::size_t idx = std::clamp<std::size_t>(ceil_count(gamma * static_cast<double>(len)), 1, len - 1);
  SplitText split;
  split.gamma = gamma;
  split.split_index = idx;
  split.prefix = seq.slice(0, idx);
  split.remainder = seq.slice(idx, len);
  return split;
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "black") return ScoreMode::kBlack;
  if (name == "white") return ScoreMode::kWhite;
  throw InvalidArgument("unknown mode: " + std::string(name) + " (expected black or white)");
}

std::string_view to_string(ScoreMode mode) { return mode == ScoreMode::kBlack ? "black" : "white"; }

Verdict parse_verdict(std::string_view name) {
  if (name == "machine") return Verdict::kMachine;
  if (name == "human") return Verdict::kHuman;
  if (name == "undecided") return Verdict::kUndecided;
  throw InvalidArgument("unknown verdict: " + std::string(name));
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kMachine: return "machine";
    case Verdict::kHuman: return "human";
    case Verdict::kUndecided: return "undecided";
  }
  return "?";
}

void DetectionConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must be in (0, 1)");
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (!(length_slack >= 0.0)) throw InvalidArgument("length slack must be >= 0");
  if (threshold && !std::isfinite(*threshold)) throw InvalidArgument("threshold must be finite");
  score.validate();
  generation.validate();
}

nlohmann::json to_json(const DetectionConfig& cfg) {
  return {{"gamma", cfg.gamma},
          {"k", cfg.k},
          {"mode", to_string(cfg.mode)},
          {"n0", cfg.score.n0},
          {"nmax", cfg.score.n_max},
          {"weight_fn", to_string(cfg.score.weight_fn)},
          {"evidence_cap", cfg.score.evidence_cap},
          {"generation", to_json(cfg.generation)},
          {"threshold", optional_number(cfg.threshold)},
          {"prompt_known", cfg.prompt_known},
          {"tokenize", to_string(cfg.tokenize)},
          {"length_slack", cfg.length_slack},
          {"wscore_per_token", cfg.wscore_per_token}};
}

DetectionConfig detection_config_from_json(const nlohmann::json& j, DetectionConfig cfg) {
  try {
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.k = j.value("k", cfg.k);
    if (j.contains("mode")) cfg.mode = parse_score_mode(j.at("mode").get<std::string>());
    cfg.score.n0 = j.value("n0", cfg.score.n0);
    cfg.score.n_max = j.value("nmax", cfg.score.n_max);
    if (j.contains("weight_fn")) cfg.score.weight_fn = parse_weight_fn(j.at("weight_fn").get<std::string>());
    cfg.score.evidence_cap = j.value("evidence_cap", cfg.score.evidence_cap);
    if (j.contains("generation")) {
      nlohmann::json merged = to_json(cfg.generation);
      merged.update(j.at("generation"));
      cfg.generation = generation_params_from_json(merged);
    }
    if (j.contains("threshold")) cfg.threshold = read_optional_number(j, "threshold");
    cfg.prompt_known = j.value("prompt_known", cfg.prompt_known);
    if (j.contains("tokenize")) cfg.tokenize = parse_tokenize_mode(j.at("tokenize").get<std::string>());
    cfg.length_slack = j.value("length_slack", cfg.length_slack);
    cfg.wscore_per_token = j.value("wscore_per_token", cfg.wscore_per_token);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed detection config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Verdict decide(double score, std::optional<double> threshold) {
  if (!threshold) return Verdict::kUndecided;
  return score > *threshold ? Verdict::kMachine : Verdict::kHuman;
}

DetectionReport detect(std::string_view text, Backend& backend, const DetectionConfig& cfg,
                       std::optional<std::string> prompt) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  const TokenSequence tokens = tokenize(text, cfg.tokenize);
  if (tokens.size() < 2) throw InvalidArgument("text needs at least 2 tokens for detection");
  if (cfg.mode == ScoreMode::kWhite && !backend.can_score()) {
    throw CapabilityError("white-box mode needs a backend that can score; '" + backend.id() + "' cannot");
  }
  const SplitText split = truncate(tokens, cfg.gamma);
  const TokenSequence& y0 = split.remainder;

  // Case-preserving text for the backend; same token boundaries as `tokens`.
  const TokenSequence original = tokenize(text, TokenizeMode::kWhitespaceExact);
  const std::string prefix_text = join_tokens(std::span(original.tokens).first(split.split_index));
  const std::string y0_text = join_tokens(std::span(original.tokens).subspan(split.split_index));

  const std::size_t budget = ceil_count((1.0 + cfg.length_slack) * static_cast<double>(y0.size()));
  GenerationParams params = cfg.generation;
  params.max_tokens = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(params.max_tokens), budget));
  const bool use_prompt = cfg.prompt_known && prompt && !prompt->empty();
  if (!params.system_prompt) {
    params.system_prompt = std::string(use_prompt ? kAnswerSystemPrompt : kContinueSystemPrompt);
  }
  if (!params.user_prompt_template) {
    params.user_prompt_template = std::string(use_prompt ? kAnswerUserTemplate : kContinueUserTemplate);
  }

  std::vector<Continuation> raw;
  try {
    raw = generate_continuations(backend, prefix_text, cfg.k, params,
                                 use_prompt ? prompt : std::optional<std::string>());
  } catch (const TransportError& e) {
    throw PartialResultsError(std::string("regeneration failed, detection aborted: ") + e.what());
  } catch (const CacheMissError& e) {
    throw PartialResultsError(std::string("regeneration failed, detection aborted: ") + e.what());
  }

  const std::size_t clip_to = cfg.mode == ScoreMode::kWhite ? y0.size() : budget;
  std::vector<TokenSequence> omega;
  omega.reserve(raw.size());
  DetectionReport report;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    omega.push_back(from_tokens(clip(tokenize(raw[i].text, cfg.tokenize), clip_to)));
    RegenerationDiagnostic diag;
    diag.index = static_cast<int>(i) + 1;
    diag.text = raw[i].text;
    diag.tokens_used = omega.back().size();
    report.regenerations.push_back(std::move(diag));
  }

  if (cfg.mode == ScoreMode::kBlack) {
    BlackboxScore bs = bscore(y0, omega, cfg.score);
    report.score = bs.value;
    report.per_n_terms = std::move(bs.per_n_terms);
    report.evidence = std::move(bs.evidence);
    report.evidence_total = bs.evidence_total;
    report.evidence_truncated = bs.evidence_truncated;
    for (std::size_t i = 0; i < bs.per_k_terms.size(); ++i) report.regenerations[i].score_term = bs.per_k_terms[i];
  } else {
    ScoredContinuation scored_y0{y0, score_continuation(backend, prefix_text, y0_text), std::nullopt};
    std::vector<ScoredContinuation> scored;
    scored.reserve(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const std::string yk_text = omega[i].joined();
      scored.push_back({omega[i], score_continuation(backend, prefix_text, yk_text), std::nullopt});
      report.regenerations[i].logprob = scored.back().logprob;
    }
    report.score = wscore(scored_y0, scored, WScoreOptions{cfg.wscore_per_token});
    report.y0_logprob = scored_y0.logprob;
  }

  report.mode = cfg.mode;
  report.threshold = cfg.threshold;
  report.verdict = decide(report.score, cfg.threshold);
  report.gamma = cfg.gamma;
  report.k = cfg.k;
  report.backend = backend.id();
  report.prefix_text = prefix_text;
  report.y0_text = y0_text;
  report.token_count = tokens.size();
  report.split_index = split.split_index;
  if (cfg.record_timing) {
    report.timing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return report;
}

nlohmann::json to_json(const DetectionReport& r) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& e : r.evidence) {
    evidence.push_back({{"ngram", e.text()}, {"n", e.n}, {"k", e.k}, {"pos_y0", e.pos_y0}, {"pos_yk", e.pos_yk}});
  }
  nlohmann::json regens = nlohmann::json::array();
  for (const auto& g : r.regenerations) {
    regens.push_back({{"index", g.index},
                      {"text", g.text},
                      {"tokens_used", g.tokens_used},
                      {"logprob", optional_number(g.logprob)},
                      {"score_term", optional_number(g.score_term)}});
  }
  nlohmann::json per_n = nlohmann::json::object();
  for (const auto& [n, v] : r.per_n_terms) per_n[std::to_string(n)] = v;

  nlohmann::json j{{"verdict", to_string(r.verdict)},
                   {"score", r.score},
                   {"threshold", optional_number(r.threshold)},
                   {"mode", to_string(r.mode)},
                   {"gamma", r.gamma},
                   {"k", r.k},
                   {"backend", r.backend},
                   {"token_count", r.token_count},
                   {"split_index", r.split_index},
                   {"prefix", r.prefix_text},
                   {"y0", r.y0_text},
                   {"evidence", std::move(evidence)},
                   {"evidence_total", r.evidence_total},
                   {"evidence_truncated", r.evidence_truncated},
                   {"diagnostics",
                    {{"per_n_terms", std::move(per_n)},
                     {"y0_logprob", optional_number(r.y0_logprob)},
                     {"regenerations", std::move(regens)}}}};
  if (r.timing_ms) j["timing_ms"] = *r.timing_ms;
  return j;
}

DetectionReport detection_report_from_json(const nlohmann::json& j) {
  try {
    DetectionReport r;
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.score = j.at("score").get<double>();
    r.threshold = read_optional_number(j, "threshold");
    r.mode = parse_score_mode(j.at("mode").get<std::string>());
    r.gamma = j.at("gamma").get<double>();
    r.k = j.at("k").get<int>();
    r.backend = j.at("backend").get<std::string>();
    r.token_count = j.value("token_count", std::size_t{0});
    r.split_index = j.value("split_index", std::size_t{0});
    r.prefix_text = j.value("prefix", std::string());
    r.y0_text = j.at("y0").get<std::string>();
    for (const auto& e : j.at("evidence")) {
      EvidenceItem item;
      item.ngram = tokenize(e.at("ngram").get<std::string>(), TokenizeMode::kWhitespaceExact).tokens;
      item.n = e.at("n").get<int>();
      item.k = e.at("k").get<int>();
      item.pos_y0 = e.at("pos_y0").get<std::size_t>();
      item.pos_yk = e.at("pos_yk").get<std::size_t>();
      if (item.ngram.size() != static_cast<std::size_t>(item.n)) {
        throw InvalidArgument("evidence item length does not match its n");
      }
      r.evidence.push_back(std::move(item));
    }
    r.evidence_total = j.value("evidence_total", r.evidence.size());
    r.evidence_truncated = j.value("evidence_truncated", false);
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      if (d.contains("per_n_terms")) {
        for (const auto& [n, v] : d.at("per_n_terms").items()) r.per_n_terms[std::stoi(n)] = v.get<double>();
      }
      r.y0_logprob = read_optional_number(d, "y0_logprob");
      if (d.contains("regenerations")) {
        for (const auto& g : d.at("regenerations")) {
          RegenerationDiagnostic diag;
          diag.index = g.at("index").get<int>();
          diag.text = g.at("text").get<std::string>();
          diag.tokens_used = g.value("tokens_used", std::size_t{0});
          diag.logprob = read_optional_number(g, "logprob");
          diag.score_term = read_optional_number(g, "score_term");
          r.regenerations.push_back(std::move(diag));
        }
      }
    }
    r.timing_ms = read_optional_number(j, "timing_ms");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed detection report: ") + e.what());
  }
}

SlidingWindowResult sliding_window_detect(std::string_view text, Backend& backend, const DetectionConfig& cfg,
                                          int window_count) {
  if (window_count < 1) throw InvalidArgument("window count must be >= 1");
  const TokenSequence original = tokenize(text, TokenizeMode::kWhitespaceExact);
  const std::size_t len = original.size();
  const auto windows = static_cast<std::size_t>(window_count);
  const std::size_t width = len / windows;

  SlidingWindowResult result;
  bool any_machine = false;
  bool any_decided = false;
  bool any_undecided = false;
  for (std::size_t w = 0; w < windows; ++w) {
    WindowResult win;
    win.index = w;
    win.token_begin = w * width;
    win.token_end = w + 1 == windows ? len : (w + 1) * width;
    if (win.token_end - win.token_begin < 2) {
      win.reason = "window has fewer than 2 tokens";
      result.windows.push_back(std::move(win));
      continue;
    }
    const std::string window_text =
        join_tokens(std::span(original.tokens).subspan(win.token_begin, win.token_end - win.token_begin));
    win.report = detect(window_text, backend, cfg);
    win.verdict = win.report->verdict;
    any_machine = any_machine || win.verdict == Verdict::kMachine;
    any_decided = any_decided || win.verdict != Verdict::kUndecided;
    any_undecided = any_undecided || win.verdict == Verdict::kUndecided;
    result.windows.push_back(std::move(win));
  }
  if (any_machine) {
    result.aggregate = Verdict::kMachine;
  } else if (any_decided && !any_undecided) {
    result.aggregate = Verdict::kHuman;
  }
  return result;
}

nlohmann::json to_json(const SlidingWindowResult& result) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : result.windows) {
    nlohmann::json jw{{"index", w.index},
                      {"token_begin", w.token_begin},
                      {"token_end", w.token_end},
                      {"verdict", to_string(w.verdict)}};
    if (w.report) jw["report"] = to_json(*w.report);
    if (!w.reason.empty()) jw["reason"] = w.reason;
    windows.push_back(std::move(jw));
  }
  return {{"verdict", to_string(result.aggregate)}, {"windows", std::move(windows)}};
}

SourcingReport model_sourcing(std::string_view text, std::span<const BackendPtr> candidates,
                              const DetectionConfig& cfg, const SourcingOptions& opts) {
  if (candidates.size() < 2) throw InvalidArgument("model sourcing needs at least two candidate backends");
  SourcingReport report;
  report.normalized = !opts.normalization.empty();
  for (const auto& candidate : candidates) {
    try {
      double score = detect(text, *candidate, cfg).score;
      if (report.normalized) {
        auto it = opts.normalization.find(candidate->id());
        if (it == opts.normalization.end() || !(it->second.second > 0.0)) {
          throw InvalidArgument("no normalization statistics for backend '" + candidate->id() + "'");
        }
        score = (score - it->second.first) / it->second.second;
      }
      report.ranked.push_back({candidate->id(), score});
    } catch (const Error& e) {
      report.failures.push_back({candidate->id(), e.what()});
    }
  }
  if (report.ranked.size() < 2) {
    std::string detail;
    for (const auto& f : report.failures) detail += "; " + f.backend + ": " + f.error;
    throw Error("model sourcing needs at least two successful candidates" + detail);
  }
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const SourcingEntry& a, const SourcingEntry& b) { return a.score > b.score; });
  report.winner = report.ranked.front().backend;
  return report;
}

nlohmann::json to_json(const SourcingReport& report) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& e : report.ranked) ranked.push_back({{"backend", e.backend}, {"score", e.score}});
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) failures.push_back({{"backend", f.backend}, {"error", f.error}});
  return {{"winner", report.winner},
          {"ranked", std::move(ranked)},
          {"failures", std::move(failures)},
          {"normalized", report.normalized}};
}

}  // namespace dnagpt
