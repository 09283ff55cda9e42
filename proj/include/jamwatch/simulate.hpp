#pragma once

#include "jamwatch/metrics.hpp"
#include "jamwatch/observables.hpp"
#include "jamwatch/scenario.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace jamwatch {

struct SimulationResult {
  std::vector<ObservableEpoch> epochs;
  GroundTruth truth;
};

/// Lock state of one satellite channel. A channel whose C/N0 falls below the
/// tracking threshold loses lock and reports nothing until it has stayed
/// trackable for the reacquisition delay.
class ChannelLock {
public:
  ChannelLock(double threshold_dbhz, double reacquisition_delay_s)
      : threshold_(threshold_dbhz), delay_(reacquisition_delay_s) {}

  /// Returns true when the channel reports C/N0 at time t.
  bool update(double t, double cn0_dbhz);
  bool locked() const noexcept { return locked_; }

private:
  double threshold_;
  double delay_;
  bool locked_ = true;
  std::optional<double> trackable_since_;
};

/// Observable-level simulation: steady-state AGC gain from total input power
/// plus Gaussian jitter, and C/N0 estimated on statistically simulated prompts
/// at the jammed effective C/N0.
SimulationResult simulate_observables(const Scenario& scenario);

struct IqRunOptions {
  /// Dump of the combined front-end input (".iq32" plus ".hdr" sidecar).
  std::optional<std::filesystem::path> dump_path;
};

/// Sample-level simulation: noise + spread satellite signals + scheduled chirp,
/// AGC, ADC, prompt correlation against each code and C/N0 estimation. Runs
/// epoch by epoch at frontend.bandwidth_hz.
SimulationResult simulate_iq(const Scenario& scenario, const IqRunOptions& options = {});

/// Mean input power (linear) seen by the AGC at a given JNR.
double frontend_input_power(const Scenario& scenario, std::optional<double> jnr_db);

} // namespace jamwatch
