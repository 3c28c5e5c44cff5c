#pragma once

#include <string>
#include <string_view>

#include "dnagpt/pipeline.hpp"

namespace dnagpt {

enum class ReportFormat { kMarkdown, kHtml };
ReportFormat parse_report_format(std::string_view name);

// Renders Y0 with every evidenced span highlighted (overlapping spans merged
// into one highlight) and linked to an evidence list, longest overlaps first,
// that quotes the matching excerpt of the regeneration.
std::string render_report(const DetectionReport& report, ReportFormat format);

}  // namespace dnagpt
