#pragma once

#include "jamwatch/observables.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jamwatch {

inline constexpr double kDefaultAgcDropDb = 2.0;
inline constexpr double kDefaultCnoDropDb = 5.0;
inline constexpr std::size_t kMinCalibrationSamples = 30;

/// AGC threshold: mu_ref - 3 sigma_ref - t_drop.
struct AgcCalibration {
  double mu_ref = 0.0;
  double sigma_ref = 0.0;
  double t_drop = kDefaultAgcDropDb;
  double threshold = 0.0;

  bool operator==(const AgcCalibration&) const = default;
};

struct CnoCalibration {
  std::map<SatId, double> per_sat_ref;
  double drop_threshold = kDefaultCnoDropDb;
  int min_sats = 1;
  std::vector<SatId> excluded;
  std::vector<std::string> warnings;

  bool operator==(const CnoCalibration&) const = default;
};

/// Mean and population standard deviation of interference-free AGC samples.
/// Throws InsufficientCalibration below 30 samples.
AgcCalibration calibrate_agc(std::span<const double> samples, double t_drop = kDefaultAgcDropDb);

/// True when the AGC gain is strictly below the threshold.
/// Throws MissingObservable if the epoch has no AGC value.
bool agc_detect(const ObservableEpoch& epoch, const AgcCalibration& cal);

/// Default quorum: min(4, ceil(n_calibrated / 2)).
int default_min_sats(std::size_t n_calibrated) noexcept;

/// Per-satellite mean C/N0 over the window. Satellites with fewer than 30
/// samples are excluded and reported. `min_sats` defaults to default_min_sats.
CnoCalibration calibrate_cno(std::span<const ObservableEpoch> epochs, double drop_threshold = kDefaultCnoDropDb,
                             std::optional<int> min_sats = std::nullopt);

struct CnoDecision {
  bool flag = false;
  int dropping = 0; ///< calibrated satellites below ref - drop, lost ones included
  int present = 0;  ///< calibrated satellites reported or marked lost
  int lost = 0;
  int quorum = 0;   ///< min(min_sats, present)
};

/// Multi-satellite concurrent-drop test. Lost satellites count as dropping.
/// Throws MissingObservable when no calibrated satellite is present or lost.
CnoDecision cno_decide(const ObservableEpoch& epoch, const CnoCalibration& cal);
bool cno_detect(const ObservableEpoch& epoch, const CnoCalibration& cal);

struct DetectorVerdict {
  double t = 0.0;
  std::optional<bool> agc_flag;
  std::optional<bool> cno_flag;
  std::optional<double> agc_db;
  std::optional<double> agc_threshold;
  int cno_dropping = 0;
  int cno_present = 0;
  int cno_quorum = 0;

  bool operator==(const DetectorVerdict&) const = default;
};

struct DetectorOptions {
  /// Consecutive raw detections required before a flag is raised (1 = none).
  int debounce = 1;
};

/// Runs both detectors over every epoch. An absent calibration or observable
/// yields an absent flag for that epoch rather than an error.
std::vector<DetectorVerdict> run_detectors(std::span<const ObservableEpoch> epochs,
                                           const std::optional<AgcCalibration>& agc_cal,
                                           const std::optional<CnoCalibration>& cno_cal,
                                           const DetectorOptions& options = {});

} // namespace jamwatch
