#include "dnagpt/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "dnagpt/error.hpp"

namespace dnagpt {
namespace {

// Token ids packed into a u32string so that grams become cheap string views.
struct Interned {
  std::u32string y0;
  std::vector<std::u32string> omega;
};

Interned intern(const TokenSequence& y0, std::span<const TokenSequence> omega) {
  std::unordered_map<std::string_view, char32_t> ids;
  auto encode = [&](const TokenSequence& seq) {
    std::u32string out;
    out.reserve(seq.size());
    for (const auto& tok : seq.tokens) {
      auto [it, inserted] = ids.try_emplace(tok, static_cast<char32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  Interned result;
  result.y0 = encode(y0);
  result.omega.reserve(omega.size());
  for (const auto& yk : omega) result.omega.push_back(encode(yk));
  return result;
}

struct RawEvidence {
  int n;
  int k;
  std::size_t pos_y0;
  std::size_t pos_yk;
};

struct Overlap {
  std::map<int, double> per_n;
  std::vector<double> per_k;
  std::vector<RawEvidence> evidence;
};

struct GramEntry {
  std::size_t first_pos;
  int last_k;  // last regeneration that matched, for per-k deduplication
};

Overlap compute_overlap(const TokenSequence& y0, std::span<const TokenSequence> omega,
                        const ScoreConfig& cfg) {
  cfg.validate();
  if (omega.empty()) throw InvalidArgument("regeneration set must not be empty");

  const Interned ids = intern(y0, omega);
  const double inv_k = 1.0 / static_cast<double>(omega.size());
  const bool log_space = cfg.weight_fn == WeightFn::kExp;
  const auto len0 = static_cast<int>(y0.size());

  Overlap out;
  out.per_k.assign(omega.size(), 0.0);
  std::unordered_map<std::u32string_view, GramEntry> y0_grams;
  for (int n = cfg.n0; n <= std::min(cfg.n_max, len0); ++n) {
    const std::u32string_view s0 = ids.y0;
    y0_grams.clear();
    for (std::size_t i = 0; i + n <= s0.size(); ++i) {
      y0_grams.try_emplace(s0.substr(i, n), GramEntry{i, 0});
    }
    const auto num_grams0 = static_cast<double>(y0_grams.size());

    double term_sum = 0.0;
    for (std::size_t k = 0; k < ids.omega.size(); ++k) {
      const std::u32string_view sk = ids.omega[k];
      if (sk.empty()) continue;
      const int k1 = static_cast<int>(k) + 1;
      std::size_t shared = 0;
      for (std::size_t j = 0; j + n <= sk.size(); ++j) {
        auto it = y0_grams.find(sk.substr(j, n));
        if (it == y0_grams.end() || it->second.last_k == k1) continue;
        it->second.last_k = k1;
        ++shared;
        out.evidence.push_back({n, k1, it->second.first_pos, j});
      }
      if (shared == 0) continue;
      const auto len_k = static_cast<double>(sk.size());
      double term = 0.0;
      if (log_space) {
        term = std::exp(log_weight(cfg.weight_fn, n) + std::log(static_cast<double>(shared)) - std::log(len_k) -
                        std::log(num_grams0));
      } else {
        term = weight(cfg.weight_fn, n) * static_cast<double>(shared) / (len_k * num_grams0);
      }
      term_sum += term;
      out.per_k[k] += term;
    }
    out.per_n[n] = term_sum * inv_k;
  }

  std::sort(out.evidence.begin(), out.evidence.end(), [](const RawEvidence& a, const RawEvidence& b) {
    if (a.n != b.n) return a.n > b.n;
    if (a.k != b.k) return a.k < b.k;
    return a.pos_y0 < b.pos_y0;
  });
  return out;
}

EvidenceItem materialize(const RawEvidence& raw, const TokenSequence& y0) {
  EvidenceItem item;
  item.n = raw.n;
  item.k = raw.k;
  item.pos_y0 = raw.pos_y0;
  item.pos_yk = raw.pos_yk;
  item.ngram.assign(y0.tokens.begin() + static_cast<std::ptrdiff_t>(raw.pos_y0),
                    y0.tokens.begin() + static_cast<std::ptrdiff_t>(raw.pos_y0 + raw.n));
  return item;
}

}  // namespace

NGramSet extract_ngrams(const TokenSequence& seq, int n) {
  if (n <= 0) throw InvalidArgument("n-gram length must be positive");
  NGramSet out;
  out.n = n;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= seq.size(); ++i) {
    out.grams.emplace(seq.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                      seq.tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
  }
  return out;
}

WeightFn parse_weight_fn(std::string_view name) {
  if (name == "log") return WeightFn::kLog;
  if (name == "n") return WeightFn::kLinear;
  if (name == "nlogn") return WeightFn::kNLogN;
  if (name == "nlog2n") return WeightFn::kNLog2N;
  if (name == "n2") return WeightFn::kSquare;
  if (name == "exp") return WeightFn::kExp;
  throw InvalidArgument("unknown weight function: " + std::string(name) +
                        " (expected log, n, nlogn, nlog2n, n2, exp)");
}

std::string_view to_string(WeightFn fn) {
  switch (fn) {
    case WeightFn::kLog: return "log";
    case WeightFn::kLinear: return "n";
    case WeightFn::kNLogN: return "nlogn";
    case WeightFn::kNLog2N: return "nlog2n";
    case WeightFn::kSquare: return "n2";
    case WeightFn::kExp: return "exp";
  }
  return "?";
}

double weight(WeightFn fn, int n) {
  const double x = n;
  switch (fn) {
    case WeightFn::kLog: return std::log(x);
    case WeightFn::kLinear: return x;
    case WeightFn::kNLogN: return x * std::log(x);
    case WeightFn::kNLog2N: return x * std::log(x) * std::log(x);
    case WeightFn::kSquare: return x * x;
    case WeightFn::kExp: return std::exp(x);
  }
  return 0.0;
}

double log_weight(WeightFn fn, int n) {
  return fn == WeightFn::kExp ? static_cast<double>(n) : std::log(weight(fn, n));
}

void ScoreConfig::validate() const {
  if (n0 < 1 || n0 > n_max) {
    throw InvalidArgument("score config requires 1 <= n0 <= N, got n0=" + std::to_string(n0) +
                          " N=" + std::to_string(n_max));
  }
  // Every preset is nondecreasing on n >= 1, so checking n0 suffices.
  if (!(weight(weight_fn, n0) > 0.0)) {
    throw InvalidArgument("weight function " + std::string(to_string(weight_fn)) +
                          " is not positive at n0=" + std::to_string(n0));
  }
}

std::string EvidenceItem::text() const { return join_tokens(ngram); }

BlackboxScore bscore(const TokenSequence& y0, std::span<const TokenSequence> omega,
                     const ScoreConfig& cfg) {
  Overlap overlap = compute_overlap(y0, omega, cfg);
  BlackboxScore score;
  score.per_n_terms = std::move(overlap.per_n);
  score.per_k_terms = std::move(overlap.per_k);
  for (const auto& [n, term] : score.per_n_terms) score.value += term;
  score.evidence_total = overlap.evidence.size();
  const std::size_t keep = std::min(cfg.evidence_cap, overlap.evidence.size());
  score.evidence_truncated = keep < overlap.evidence.size();
  score.evidence.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) score.evidence.push_back(materialize(overlap.evidence[i], y0));
  return score;
}

std::vector<EvidenceItem> extract_evidence(const TokenSequence& y0,
                                           std::span<const TokenSequence> omega,
                                           const ScoreConfig& cfg) {
  const Overlap overlap = compute_overlap(y0, omega, cfg);
  std::vector<EvidenceItem> out;
  out.reserve(overlap.evidence.size());
  for (const auto& raw : overlap.evidence) out.push_back(materialize(raw, y0));
  return out;
}

}  // namespace dnagpt
