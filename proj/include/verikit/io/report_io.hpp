#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "verikit/verify/batch.hpp"

namespace verikit::io {

/// One JSON object per line. Scores skipped by short-circuit evaluation are
/// written as null.
std::string report_line(const DetectionReport& report);
std::string format_reports(const std::vector<DetectionReport>& reports);

DetectionReport parse_report_line(const std::string& line, const std::string& source = "<reports>");
std::vector<DetectionReport> parse_reports(const std::string& text,
                                           const std::string& source = "<reports>");
std::vector<DetectionReport> read_reports(const std::filesystem::path& path);

}  // namespace verikit::io
