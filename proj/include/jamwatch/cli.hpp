#pragma once

// Workflow commands behind the `jamwatch` executable. Each command reads and
// writes files so stages compose: simulate -> calibrate -> detect -> evaluate.

#include "jamwatch/metrics.hpp"
#include "jamwatch/records.hpp"
#include "jamwatch/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jamwatch::cli {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kOutDirEnv = "JAMWATCH_OUT_DIR";

/// `--out` if given, else $JAMWATCH_OUT_DIR, else `fallback`.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& out, const std::filesystem::path& fallback);

/// Parses "START:END" in seconds.
std::pair<double, double> parse_window(const std::string& text);

/// SHA-256 of the canonical scenario JSON, hex encoded.
std::string config_hash(const Scenario& scenario);

struct SimulateOptions {
  std::optional<std::filesystem::path> config; ///< defaults when absent
  std::optional<std::uint64_t> seed;
  bool iq = false;
  std::optional<std::filesystem::path> dump_iq;
  bool binary = false; ///< also write the framed binary log
  std::filesystem::path out_dir;
};

struct SimulateOutputs {
  std::filesystem::path log;
  std::optional<std::filesystem::path> binary_log;
  std::filesystem::path truth;
  std::filesystem::path manifest;
  std::size_t epochs = 0;
};

SimulateOutputs cmd_simulate(const SimulateOptions& options);

struct CalibrateOptions {
  std::filesystem::path log;
  std::optional<std::pair<double, double>> window; ///< falls back to the config's window
  std::optional<std::filesystem::path> config;     ///< detector parameters
  std::filesystem::path out;
};

/// Warnings are returned inside the file record and never fail the command.
CalibrationFile cmd_calibrate(const CalibrateOptions& options);

struct DetectOptions {
  std::filesystem::path log;
  std::filesystem::path calibration;
  std::filesystem::path out;
  int debounce = 1;
};

struct DetectOutputs {
  std::vector<DetectorVerdict> verdicts;
  std::vector<std::string> warnings;
};

DetectOutputs cmd_detect(const DetectOptions& options);

struct EvaluateOptions {
  std::filesystem::path verdicts;
  std::filesystem::path truth;
  double guard_band_s = 0.0;
  std::filesystem::path out_dir;
};

struct EvaluateOutputs {
  MetricsReport agc;
  MetricsReport cno;
  ComparisonTable table;
};

EvaluateOutputs cmd_evaluate(const EvaluateOptions& options);

/// Verdict flag streams (absent flags count as not raised).
std::vector<FlagSample> agc_flags(std::span<const DetectorVerdict> verdicts);
std::vector<FlagSample> cno_flags(std::span<const DetectorVerdict> verdicts);

struct ExportOptions {
  std::optional<std::filesystem::path> log;
  std::optional<std::filesystem::path> verdicts;
  std::optional<std::filesystem::path> series; ///< re-import a previous export
  std::filesystem::path out_dir;
};

struct PlotSeries {
  std::vector<ObservableEpoch> epochs;
  std::vector<DetectorVerdict> verdicts;
};

/// Writes agc.tsv, cno.tsv and flags.tsv into out_dir.
void cmd_export_plot(const ExportOptions& options);
void write_series(const PlotSeries& series, const std::filesystem::path& out_dir);
PlotSeries read_series(const std::filesystem::path& dir);

} // namespace jamwatch::cli
