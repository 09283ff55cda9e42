#include "jamwatch/metrics.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace jamwatch {

namespace {

bool in_guard_band(double t, const JammingSchedule& schedule, double guard) {
  if (guard <= 0.0)
    return false;
  for (const auto& iv : schedule.intervals())
    if ((t >= iv.start_s - guard && t < iv.start_s) || (t >= iv.end_s && t < iv.end_s + guard))
      return true;
  return false;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string signed_points(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f pp", 100.0 * v);
  return buf;
}

} // namespace

MetricsReport evaluate(std::span<const FlagSample> flags, const GroundTruth& truth, double guard_band_s) {
  if (truth.intervals.empty())
    throw InvalidArgument("ground truth has no intervals");
  if (!(guard_band_s >= 0.0))
    throw InvalidArgument("guard band must be >= 0");
  for (std::size_t k = 1; k < flags.size(); ++k)
    if (!(flags[k].t > flags[k - 1].t))
      throw UnsortedFlags("flag timestamps not strictly increasing at index " + std::to_string(k));

  MetricsReport r;
  r.truth = truth;
  r.guard_band_s = guard_band_s;
  r.intervals_total = truth.intervals.size();
  r.interval_detected.assign(r.intervals_total, false);
  std::vector<std::size_t> missed_in_interval(r.intervals_total, 0);

  for (const auto& f : flags) {
    if (auto k = truth.intervals.interval_at(f.t)) {
      if (f.flag) {
        ++r.confusion.tp;
        r.interval_detected[*k] = true;
      } else {
        ++r.confusion.fn;
        ++missed_in_interval[*k];
      }
      continue;
    }
    if (in_guard_band(f.t, truth.intervals, guard_band_s)) {
      ++r.excluded_epochs;
      continue;
    }
    if (f.flag) {
      ++r.confusion.fp;
      r.false_alarm_times.push_back(f.t);
    } else {
      ++r.confusion.tn;
    }
  }

  r.intervals_detected = static_cast<std::size_t>(std::count(r.interval_detected.begin(), r.interval_detected.end(), true));
  const std::size_t jammed = r.confusion.tp + r.confusion.fn;
  std::size_t missed_detected = 0;
  for (std::size_t k = 0; k < r.intervals_total; ++k)
    if (r.interval_detected[k])
      missed_detected += missed_in_interval[k];
  r.detection_probability = ratio(r.confusion.tp, jammed);
  r.epoch_miss_rate = jammed == 0 ? 0.0 : 1.0 - r.detection_probability;
  r.missed_detection_rate = ratio(missed_detected, jammed);
  r.false_alarm_rate = ratio(r.confusion.fp, r.confusion.tp + r.confusion.fp);
  r.false_alarm_density = ratio(r.confusion.fp, r.confusion.fp + r.confusion.tn);
  return r;
}

ComparisonTable compare(const MetricsReport& a, const MetricsReport& b, std::string name_a, std::string name_b) {
  if (!(a.truth == b.truth) || a.guard_band_s != b.guard_band_s)
    throw TruthMismatch("reports were computed against different ground truth or guard bands");

  ComparisonTable table{std::move(name_a), std::move(name_b), {}};
  auto intervals = [](const MetricsReport& r) {
    return std::to_string(r.intervals_detected) + "/" + std::to_string(r.intervals_total);
  };
  const long delta_intervals = static_cast<long>(b.intervals_detected) - static_cast<long>(a.intervals_detected);
  table.rows.push_back({"Interference detected intervals", intervals(a), intervals(b),
                        (delta_intervals >= 0 ? "+" : "") + std::to_string(delta_intervals)});
  table.rows.push_back({"Detection probability", percent(a.detection_probability), percent(b.detection_probability),
                        signed_points(b.detection_probability - a.detection_probability)});
  table.rows.push_back({"Missed detection rate", percent(a.missed_detection_rate), percent(b.missed_detection_rate),
                        signed_points(b.missed_detection_rate - a.missed_detection_rate)});
  table.rows.push_back({"False alarm rate", percent(a.false_alarm_rate), percent(b.false_alarm_rate),
                        signed_points(b.false_alarm_rate - a.false_alarm_rate)});
  return table;
}

std::string ComparisonTable::render() const {
  std::size_t w0 = 0, w1 = name_a.size(), w2 = name_b.size(), w3 = 5;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.label.size());
    w1 = std::max(w1, r.a.size());
    w2 = std::max(w2, r.b.size());
    w3 = std::max(w3, r.delta.size());
  }
  std::ostringstream out;
  auto line = [&](const std::string& c0, const std::string& c1, const std::string& c2, const std::string& c3) {
    out << c0 << std::string(w0 - c0.size() + 2, ' ') << c1 << std::string(w1 - c1.size() + 2, ' ') << c2
        << std::string(w2 - c2.size() + 2, ' ') << c3 << "\n";
  };
  line("", name_a, name_b, "delta");
  for (const auto& r : rows)
    line(r.label, r.a, r.b, r.delta);
  return out.str();
}

} // namespace jamwatch
