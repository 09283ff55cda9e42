#include "jamwatch/detect.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace jamwatch {

AgcCalibration calibrate_agc(std::span<const double> samples, double t_drop) {
  if (samples.size() < kMinCalibrationSamples)
    throw InsufficientCalibration("AGC calibration needs at least " + std::to_string(kMinCalibrationSamples) +
                                  " interference-free samples, got " + std::to_string(samples.size()));
  if (!(t_drop >= 0.0))
    throw InvalidArgument("T_drop must be >= 0");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double s : samples)
    var += (s - mean) * (s - mean);
  var /= n;

  AgcCalibration cal;
  cal.mu_ref = mean;
  cal.sigma_ref = std::sqrt(var);
  cal.t_drop = t_drop;
  cal.threshold = cal.mu_ref - 3.0 * cal.sigma_ref - cal.t_drop;
  return cal;
}

bool agc_detect(const ObservableEpoch& epoch, const AgcCalibration& cal) {
  if (!epoch.agc_db)
    throw MissingObservable("epoch at t=" + std::to_string(epoch.t) + " carries no AGC value");
  return *epoch.agc_db < cal.threshold;
}

int default_min_sats(std::size_t n_calibrated) noexcept {
  const auto half = static_cast<int>((n_calibrated + 1) / 2);
  return std::max(1, std::min(4, half));
}

CnoCalibration calibrate_cno(std::span<const ObservableEpoch> epochs, double drop_threshold,
                             std::optional<int> min_sats) {
  if (!(drop_threshold > 0.0))
    throw InvalidArgument("C/N0 drop threshold must be > 0");
  if (min_sats && *min_sats < 1)
    throw InvalidArgument("min_sats must be >= 1");

  std::map<SatId, std::pair<double, std::size_t>> sums;
  std::set<SatId> seen;
  for (const auto& e : epochs) {
    for (const auto& [sat, v] : e.cno_dbhz) {
      auto& [sum, count] = sums[sat];
      sum += v;
      ++count;
    }
    seen.insert(e.lost.begin(), e.lost.end());
  }

  CnoCalibration cal;
  cal.drop_threshold = drop_threshold;
  for (const auto& [sat, acc] : sums) {
    seen.erase(sat);
    if (acc.second >= kMinCalibrationSamples) {
      cal.per_sat_ref[sat] = acc.first / static_cast<double>(acc.second);
    } else {
      cal.excluded.push_back(sat);
      cal.warnings.push_back("satellite " + std::to_string(sat) + " excluded: " + std::to_string(acc.second) +
                             " samples < " + std::to_string(kMinCalibrationSamples));
    }
  }
  // Satellites seen only as lost inside the window never produce a reference.
  for (SatId sat : seen) {
    cal.excluded.push_back(sat);
    cal.warnings.push_back("satellite " + std::to_string(sat) + " excluded: no C/N0 samples in window");
  }
  std::sort(cal.excluded.begin(), cal.excluded.end());
  if (cal.per_sat_ref.empty())
    throw NoSatellites("no satellite has enough C/N0 samples to calibrate");
  cal.min_sats = min_sats.value_or(default_min_sats(cal.per_sat_ref.size()));
  return cal;
}

CnoDecision cno_decide(const ObservableEpoch& epoch, const CnoCalibration& cal) {
  CnoDecision d;
  for (const auto& [sat, ref] : cal.per_sat_ref) {
    if (auto it = epoch.cno_dbhz.find(sat); it != epoch.cno_dbhz.end()) {
      ++d.present;
      if (it->second < ref - cal.drop_threshold)
        ++d.dropping;
    } else if (std::find(epoch.lost.begin(), epoch.lost.end(), sat) != epoch.lost.end()) {
      ++d.present;
      ++d.lost;
      ++d.dropping;
    }
  }
  if (d.present == 0)
    throw MissingObservable("epoch at t=" + std::to_string(epoch.t) + " carries no calibrated satellite");
  d.quorum = std::min(cal.min_sats, d.present);
  d.flag = d.dropping >= d.quorum;
  return d;
}

bool cno_detect(const ObservableEpoch& epoch, const CnoCalibration& cal) { return cno_decide(epoch, cal).flag; }

std::vector<DetectorVerdict> run_detectors(std::span<const ObservableEpoch> epochs,
                                           const std::optional<AgcCalibration>& agc_cal,
                                           const std::optional<CnoCalibration>& cno_cal,
                                           const DetectorOptions& options) {
  if (options.debounce < 1)
    throw InvalidArgument("debounce must be >= 1");
  std::vector<DetectorVerdict> verdicts;
  verdicts.reserve(epochs.size());
  int agc_run = 0;
  int cno_run = 0;
  for (const auto& e : epochs) {
    DetectorVerdict v;
    v.t = e.t;
    v.agc_db = e.agc_db;
    if (agc_cal) {
      v.agc_threshold = agc_cal->threshold;
      if (e.agc_db) {
        agc_run = agc_detect(e, *agc_cal) ? agc_run + 1 : 0;
        v.agc_flag = agc_run >= options.debounce;
      }
    }
    if (cno_cal) {
      try {
        const auto d = cno_decide(e, *cno_cal);
        cno_run = d.flag ? cno_run + 1 : 0;
        v.cno_flag = cno_run >= options.debounce;
        v.cno_dropping = d.dropping;
        v.cno_present = d.present;
        v.cno_quorum = d.quorum;
      } catch (const MissingObservable&) {
        cno_run = 0;
      }
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

} // namespace jamwatch
