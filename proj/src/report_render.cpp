#include "dnagpt/report_render.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dnagpt/error.hpp"

namespace dnagpt {
namespace {

constexpr std::size_t kExcerptContext = 6;

std::string escape_markdown(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::string_view("\\`*_[]<>#|~").find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string escape_html(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Region {
  std::size_t begin;
  std::size_t end;
  std::size_t evidence;  // index of the longest item starting the region
};

// Union of evidence spans in Y0. Evidence is sorted longest first, so the
// first item touching a region is its longest.
std::vector<Region> highlight_regions(const DetectionReport& r, std::size_t y0_len) {
  std::vector<Region> spans;
  for (std::size_t i = 0; i < r.evidence.size(); ++i) {
    const auto& e = r.evidence[i];
    const std::size_t end = std::min(y0_len, e.pos_y0 + static_cast<std::size_t>(e.n));
    if (e.pos_y0 < end) spans.push_back({e.pos_y0, end, i});
  }
  std::stable_sort(spans.begin(), spans.end(), [](const Region& a, const Region& b) { return a.begin < b.begin; });
  std::vector<Region> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.begin < merged.back().end) {
      auto& m = merged.back();
      if (s.end > m.end) m.end = s.end;
      if (s.evidence < m.evidence) m.evidence = s.evidence;
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

struct Excerpt {
  std::string before, match, after;
};

Excerpt excerpt(const std::vector<std::string>& tokens, std::size_t pos, std::size_t n) {
  Excerpt ex;
  if (pos >= tokens.size()) return ex;
  const std::size_t end = std::min(tokens.size(), pos + n);
  const std::size_t from = pos > kExcerptContext ? pos - kExcerptContext : 0;
  const std::size_t to = std::min(tokens.size(), end + kExcerptContext);
  auto join = [&](std::size_t a, std::size_t b) {
    return join_tokens(std::span(tokens).subspan(a, b - a));
  };
  ex.before = (from > 0 ? "... " : "") + join(from, pos);
  ex.match = join(pos, end);
  ex.after = join(end, to) + (to < tokens.size() ? " ..." : "");
  return ex;
}

const RegenerationDiagnostic* find_regen(const DetectionReport& r, int k) {
  for (const auto& g : r.regenerations) {
    if (g.index == k) return &g;
  }
  return nullptr;
}

std::string render_markdown(const DetectionReport& r, const std::vector<std::string>& y0,
                            const std::vector<Region>& regions) {
  std::ostringstream out;
  out << "# Detection report\n\n";
  out << "- Verdict: **" << to_string(r.verdict) << "**\n";
  out << "- Score (" << (r.mode == ScoreMode::kBlack ? "BScore" : "WScore") << "): " << fmt(r.score) << "\n";
  out << "- Threshold: " << (r.threshold ? fmt(*r.threshold) : std::string("none (calibrate to decide)")) << "\n";
  out << "- Backend: " << escape_markdown(r.backend) << ", K = " << r.k << ", gamma = " << fmt(r.gamma) << "\n\n";

  out << "## Remainder\n\n";
  std::size_t next = 0;
  for (const auto& region : regions) {
    if (region.begin > next) {
      out << escape_markdown(join_tokens(std::span(y0).subspan(next, region.begin - next))) << ' ';
    }
    out << "**" << escape_markdown(join_tokens(std::span(y0).subspan(region.begin, region.end - region.begin)))
        << "**<sup>[E" << region.evidence + 1 << "](#e" << region.evidence + 1 << ")</sup> ";
    next = region.end;
  }
  if (next < y0.size()) out << escape_markdown(join_tokens(std::span(y0).subspan(next)));
  out << "\n\n## Evidence\n\n";
  if (r.evidence.empty()) {
    out << "No overlapping n-grams found between the remainder and the regenerations.\n";
    return out.str();
  }
  if (r.evidence_truncated) {
    out << "> Evidence truncated: showing " << r.evidence.size() << " of " << r.evidence_total << " items.\n\n";
  }
  for (std::size_t i = 0; i < r.evidence.size(); ++i) {
    const auto& e = r.evidence[i];
    out << "<a id=\"e" << i + 1 << "\"></a>" << i + 1 << ". n = " << e.n << ", regeneration " << e.k
        << ": `" << e.text() << "`";
    if (const auto* g = find_regen(r, e.k)) {
      const auto ex = excerpt(tokenize(g->text, TokenizeMode::kWhitespaceExact).tokens, e.pos_yk,
                              static_cast<std::size_t>(e.n));
      out << "  \n   regeneration " << e.k << ": " << escape_markdown(ex.before) << " **"
          << escape_markdown(ex.match) << "** " << escape_markdown(ex.after);
    }
    out << "\n";
  }
  return out.str();
}

std::string render_html(const DetectionReport& r, const std::vector<std::string>& y0,
                        const std::vector<Region>& regions) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Detection report</title>\n"
      << "<style>mark{background:#cfe3ff} .match{font-weight:bold}</style>\n</head>\n<body>\n";
  out << "<h1>Detection report</h1>\n<ul>\n";
  out << "<li>Verdict: <strong>" << to_string(r.verdict) << "</strong></li>\n";
  out << "<li>Score (" << (r.mode == ScoreMode::kBlack ? "BScore" : "WScore") << "): " << fmt(r.score) << "</li>\n";
  out << "<li>Threshold: " << (r.threshold ? fmt(*r.threshold) : std::string("none (calibrate to decide)"))
      << "</li>\n";
  out << "<li>Backend: " << escape_html(r.backend) << ", K = " << r.k << ", gamma = " << fmt(r.gamma) << "</li>\n";
  out << "</ul>\n<h2>Remainder</h2>\n<p>";
  std::size_t next = 0;
  for (const auto& region : regions) {
    if (region.begin > next) {
      out << escape_html(join_tokens(std::span(y0).subspan(next, region.begin - next))) << ' ';
    }
    out << "<mark><a href=\"#e" << region.evidence + 1 << "\">"
        << escape_html(join_tokens(std::span(y0).subspan(region.begin, region.end - region.begin)))
        << "</a></mark> ";
    next = region.end;
  }
  if (next < y0.size()) out << escape_html(join_tokens(std::span(y0).subspan(next)));
  out << "</p>\n<h2>Evidence</h2>\n";
  if (r.evidence.empty()) {
    out << "<p>No overlapping n-grams found between the remainder and the regenerations.</p>\n";
  } else {
    if (r.evidence_truncated) {
      out << "<p class=\"notice\">Evidence truncated: showing " << r.evidence.size() << " of " << r.evidence_total
          << " items.</p>\n";
    }
    out << "<ol>\n";
    for (std::size_t i = 0; i < r.evidence.size(); ++i) {
      const auto& e = r.evidence[i];
      out << "<li id=\"e" << i + 1 << "\">n = " << e.n << ", regeneration " << e.k << ": <code>"
          << escape_html(e.text()) << "</code>";
      if (const auto* g = find_regen(r, e.k)) {
        const auto ex = excerpt(tokenize(g->text, TokenizeMode::kWhitespaceExact).tokens, e.pos_yk,
                                static_cast<std::size_t>(e.n));
        out << "<br>regeneration " << e.k << ": " << escape_html(ex.before) << " <span class=\"match\">"
            << escape_html(ex.match) << "</span> " << escape_html(ex.after);
      }
      out << "</li>\n";
    }
    out << "</ol>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "html") return ReportFormat::kHtml;
  throw InvalidArgument("unknown report format: " + std::string(name) + " (expected markdown or html)");
}

std::string render_report(const DetectionReport& report, ReportFormat format) {
  const auto y0 = tokenize(report.y0_text, TokenizeMode::kWhitespaceExact).tokens;
  const auto regions = highlight_regions(report, y0.size());
  return format == ReportFormat::kMarkdown ? render_markdown(report, y0, regions)
                                           : render_html(report, y0, regions);
}

}  // namespace dnagpt
