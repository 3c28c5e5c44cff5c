#pragma once

// Brute-force reference implementations. Deliberately naive and independent of
// the library's data structures; only plain token vectors go in.

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace oracles {

using Tokens = std::vector<std::string>;

// Distinct n-token windows, deduplicated by pairwise comparison.
inline std::vector<Tokens> windows(const Tokens& t, int n) {
  std::vector<Tokens> out;
  for (int i = 0; i + n <= static_cast<int>(t.size()); ++i) {
    Tokens g(t.begin() + i, t.begin() + i + n);
    bool seen = false;
    for (const auto& o : out) seen = seen || o == g;
    if (!seen) out.push_back(g);
  }
  return out;
}

// Length weights by name: log, n, nlogn, nlog2n, n2, exp.
inline double weight(const std::string& name, int n) {
  const double x = n;
  if (name == "log") return std::log(x);
  if (name == "n") return x;
  if (name == "nlogn") return x * std::log(x);
  if (name == "nlog2n") return x * std::pow(std::log(x), 2.0);
  if (name == "n2") return std::pow(x, 2.0);
  return std::exp(x);
}

inline double bscore(const Tokens& y0, const std::vector<Tokens>& omega, int n0, int nmax,
                     const std::string& weight_name = "nlogn") {
  double total = 0.0;
  for (const auto& yk : omega) {
    for (int n = n0; n <= nmax; ++n) {
      const auto g0 = windows(y0, n);
      const auto gk = windows(yk, n);
      if (g0.empty() || yk.empty()) continue;
      std::size_t shared = 0;
      for (const auto& a : g0) {
        for (const auto& b : gk) shared += a == b ? 1 : 0;
      }
      total += weight(weight_name, n) * static_cast<double>(shared) /
               (static_cast<double>(yk.size()) * static_cast<double>(g0.size()));
    }
  }
  return total / static_cast<double>(omega.size());
}

// Chain-rule log-probability of cont after prefix under a Laplace-smoothed
// order-m Markov model, evaluated straight from the training corpus. A context
// suffix of length l exists when some position i >= m is preceded by it; its
// counts are taken over those positions. The longest existing suffix is used.
inline double markov_logprob(const Tokens& corpus, int order, double alpha, const Tokens& prefix, const Tokens& cont) {
  std::set<std::string> vocab(corpus.begin(), corpus.end());
  vocab.insert("<unk>");
  auto norm = [&](const std::string& t) { return vocab.count(t) ? t : std::string("<unk>"); };
  Tokens ctx;
  for (const auto& t : prefix) ctx.push_back(norm(t));
  double total = 0.0;
  for (const auto& raw : cont) {
    const std::string tok = norm(raw);
    const std::size_t max_len = std::min(ctx.size(), static_cast<std::size_t>(order));
    for (std::size_t len = max_len + 1; len-- > 0;) {
      double seen = 0.0;
      double hits = 0.0;
      for (std::size_t i = static_cast<std::size_t>(order); i < corpus.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < len; ++j) match = match && corpus[i - len + j] == ctx[ctx.size() - len + j];
        if (!match) continue;
        seen += 1.0;
        hits += corpus[i] == tok ? 1.0 : 0.0;
      }
      if (seen == 0.0) continue;
      total += std::log((hits + alpha) / (seen + alpha * static_cast<double>(vocab.size())));
      break;
    }
    ctx.push_back(tok);
  }
  return total;
}

// Mann-Whitney over all pairs, ties counted one half.
inline double auroc(const std::vector<double>& machine, const std::vector<double>& human) {
  double s = 0.0;
  for (double x : machine) {
    for (double y : human) s += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return s / static_cast<double>(machine.size() * human.size());
}

}  // namespace oracles
