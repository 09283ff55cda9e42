#pragma once

// Text records exchanged between the command-line stages: ground truth,
// calibrations, verdict logs and metric reports.

#include "jamwatch/detect.hpp"
#include "jamwatch/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jamwatch {

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text, const std::string& origin = "<truth>");
void write_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_truth(const std::filesystem::path& path);

struct CalibrationFile {
  double window_start_s = 0.0;
  double window_end_s = 0.0;
  std::size_t epochs_used = 0;
  std::optional<AgcCalibration> agc;
  std::optional<CnoCalibration> cno;
  std::vector<std::string> warnings;

  bool operator==(const CalibrationFile&) const = default;
};

std::string calibration_to_json(const CalibrationFile& cal);
CalibrationFile calibration_from_json(const std::string& text, const std::string& origin = "<calibration>");
void write_calibration(const CalibrationFile& cal, const std::filesystem::path& path);
CalibrationFile read_calibration(const std::filesystem::path& path);

/// One JSON object per line, fixed field order.
std::size_t write_verdict_log(std::span<const DetectorVerdict> verdicts, std::ostream& out);
std::size_t write_verdict_log(std::span<const DetectorVerdict> verdicts, const std::filesystem::path& path);
std::vector<DetectorVerdict> parse_verdict_log(std::istream& in);
std::vector<DetectorVerdict> parse_verdict_log(const std::filesystem::path& path);

/// Flat "key=value" lines, keys prefixed with `prefix` (e.g. "agc.").
std::string report_to_text(const MetricsReport& report, const std::string& prefix);
/// Machine-readable record of the same fields.
std::string report_to_json(const MetricsReport& report);

} // namespace jamwatch
