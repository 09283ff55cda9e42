#pragma once

#include "jamwatch/waveform.hpp"

#include <span>
#include <string>
#include <vector>

namespace jamwatch {

struct GroundTruth {
  JammingSchedule intervals;
  double epoch_period_s = 1.0;

  bool operator==(const GroundTruth&) const = default;
};

struct FlagSample {
  double t = 0.0;
  bool flag = false;
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

/// Epoch- and interval-level detection statistics.
///
/// detection_probability = TP / (TP + FN); false_alarm_rate = FP / (TP + FP)
/// (share of raised flags that are wrong); false_alarm_density = FP / (FP + TN).
/// missed_detection_rate counts jammed epochs left unflagged inside intervals
/// that were detected, over all jammed epochs; epoch_miss_rate = 1 - Pd.
struct MetricsReport {
  std::size_t intervals_detected = 0;
  std::size_t intervals_total = 0;
  std::vector<bool> interval_detected;
  double detection_probability = 0.0;
  double missed_detection_rate = 0.0;
  double epoch_miss_rate = 0.0;
  double false_alarm_rate = 0.0;
  double false_alarm_density = 0.0;
  Confusion confusion;
  std::size_t excluded_epochs = 0; ///< clean epochs inside guard bands
  std::vector<double> false_alarm_times;
  GroundTruth truth;
  double guard_band_s = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

/// Scores a time-sorted flag stream against the truth. Clean epochs within
/// `guard_band_s` of an interval edge are left out of the confusion counts.
/// Throws UnsortedFlags if timestamps are not strictly increasing.
MetricsReport evaluate(std::span<const FlagSample> flags, const GroundTruth& truth, double guard_band_s = 0.0);

struct ComparisonRow {
  std::string label;
  std::string a;
  std::string b;
  std::string delta; ///< b relative to a
};

struct ComparisonTable {
  std::string name_a;
  std::string name_b;
  std::vector<ComparisonRow> rows;

  /// Aligned text table.
  std::string render() const;
};

/// Side-by-side summary of two reports over the same truth.
/// Throws TruthMismatch otherwise.
ComparisonTable compare(const MetricsReport& a, const MetricsReport& b, std::string name_a = "AGC-based detector",
                        std::string name_b = "CNO-based detector");

} // namespace jamwatch
