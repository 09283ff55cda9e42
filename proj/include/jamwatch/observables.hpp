#pragma once

#include "jamwatch/tracking.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace jamwatch {

/// One receiver reporting period: AGC gain and per-satellite C/N0.
struct ObservableEpoch {
  double t = 0.0;
  std::optional<double> agc_db;
  std::map<SatId, double> cno_dbhz;
  std::vector<SatId> lost; ///< satellites known to have lost tracking

  bool operator==(const ObservableEpoch&) const = default;
};

/// Checks ordering and value ranges of a log; throws InvalidArgument.
void validate_epochs(std::span<const ObservableEpoch> epochs);

/// Writes one JSON object per line; returns bytes written.
std::size_t write_observable_log(std::span<const ObservableEpoch> epochs, std::ostream& out);
std::size_t write_observable_log(std::span<const ObservableEpoch> epochs, const std::filesystem::path& path);

/// Strict parse; throws ParseError naming the offending line.
std::vector<ObservableEpoch> parse_observable_log(std::istream& in);
std::vector<ObservableEpoch> parse_observable_log(const std::filesystem::path& path);

/// Loads either a ".blk" frame stream or a text log, chosen by extension.
std::vector<ObservableEpoch> load_observables(const std::filesystem::path& path);

} // namespace jamwatch
