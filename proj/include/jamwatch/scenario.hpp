#pragma once

#include "jamwatch/frontend.hpp"
#include "jamwatch/tracking.hpp"
#include "jamwatch/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jamwatch {

/// Parameters of a generated stepped-power schedule.
struct ScheduleParams {
  int n_intervals = 7;
  double interval_len_s = 30.0;
  double gap_len_s = 200.0;
  double jnr_start_db = 1.0;
  double jnr_step_db = 5.0;
};

struct FrontendConfig {
  double noise_power_db = -42.0; ///< thermal noise at the AGC input
  double bandwidth_hz = 2.0e6;   ///< noise bandwidth, also the IQ sample rate
  double target_power_db = 0.0;
  double loop_gain = 0.5;
  double block_duration_s = 0.01;
  double gain_min_db = 0.0;
  double gain_max_db = 60.0;
  double jitter_db = 0.2;        ///< observable-level gain jitter (1 sigma)
  int adc_bits = 8;
  double adc_backoff_db = 12.0;  ///< full scale above the AGC setpoint

  AgcConfig agc_config() const;
  double noise_power() const noexcept;
};

struct SatelliteConfig {
  SatId id = 0;
  double nominal_cn0_dbhz = 45.0;
};

struct TrackingConfig {
  CnoEstimatorConfig estimator{};
  std::optional<double> quality_factor = 1.5; ///< nullopt: derived from the chirp band
  double chip_rate = 1.023e6;
  double tracking_threshold_dbhz = 25.0;
  double reacquisition_delay_s = 5.0;
  std::vector<SatelliteConfig> satellites;
};

struct DetectConfig {
  double t_drop_db = 2.0;
  double drop_threshold_db = 5.0;
  std::optional<int> min_sats;
  int debounce = 1;
  double contamination_sigma_db = 1.5;
  std::optional<std::pair<double, double>> calibration_window;
};

struct Scenario {
  std::uint64_t seed = 1;
  double duration_s = 1800.0;
  double epoch_period_s = 1.0;
  ChirpConfig chirp;
  std::optional<ScheduleParams> schedule_params; ///< set when the schedule was generated
  JammingSchedule schedule;
  FrontendConfig frontend;
  TrackingConfig tracking;
  DetectConfig detect;

  /// Every cross-module invariant; throws ConfigError attributed to `origin`.
  void validate(const std::string& origin = "<scenario>") const;
  std::size_t epoch_count() const;
};

/// Default scenario: seven 30 s intervals stepped by +5 dB over a 30 min log.
Scenario default_scenario();

/// Strict JSON loader: unknown keys and type mismatches are ConfigErrors
/// naming the dotted key; omitted keys take the documented defaults.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON of a fully resolved scenario (stable key order).
std::string scenario_to_json(const Scenario& scenario);

/// Chirp band [lo, hi] actually swept by the phase law.
std::pair<double, double> chirp_band(const ChirpConfig& chirp) noexcept;

/// Q used by the tracking model, resolving "auto" from the chirp band.
double resolved_quality_factor(const Scenario& scenario);

} // namespace jamwatch
