#include "jamwatch/records.hpp"

#include "jamwatch/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace jamwatch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  out << text;
  if (!out)
    throw IoFailure("write failed on " + path.string());
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, origin + ": malformed JSON: " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& origin) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(1, origin + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(1, origin + ": field '" + key + "': " + e.what());
  }
}

std::string num(double v) { return ordered_json(v).dump(); }

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }
ordered_json optional_bool(const std::optional<bool>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

} // namespace

std::string truth_to_json(const GroundTruth& truth) {
  ordered_json j;
  j["epoch_period_s"] = truth.epoch_period_s;
  ordered_json list = ordered_json::array();
  for (const auto& iv : truth.intervals.intervals())
    list.push_back({{"start_s", iv.start_s}, {"end_s", iv.end_s}, {"jnr_db", iv.jnr_db}});
  j["intervals"] = list;
  return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  GroundTruth truth;
  truth.epoch_period_s = field<double>(j, "epoch_period_s", origin);
  const auto list = field<json>(j, "intervals", origin);
  if (!list.is_array())
    throw ParseError(1, origin + ": 'intervals' must be an array");
  std::vector<JammingInterval> intervals;
  for (const auto& iv : list)
    intervals.push_back({field<double>(iv, "start_s", origin), field<double>(iv, "end_s", origin),
                         field<double>(iv, "jnr_db", origin)});
  try {
    truth.intervals = JammingSchedule(std::move(intervals));
  } catch (const InvalidArgument& e) {
    throw ParseError(1, origin + ": " + e.what());
  }
  return truth;
}

void write_truth(const GroundTruth& truth, const std::filesystem::path& path) { write_file(path, truth_to_json(truth)); }

GroundTruth read_truth(const std::filesystem::path& path) { return truth_from_json(read_file(path), path.string()); }

std::string calibration_to_json(const CalibrationFile& cal) {
  ordered_json j;
  j["window"] = {cal.window_start_s, cal.window_end_s};
  j["epochs_used"] = cal.epochs_used;
  if (cal.agc)
    j["agc"] = {{"mu_ref", cal.agc->mu_ref},
                {"sigma_ref", cal.agc->sigma_ref},
                {"t_drop", cal.agc->t_drop},
                {"threshold", cal.agc->threshold}};
  else
    j["agc"] = nullptr;
  if (cal.cno) {
    ordered_json refs = ordered_json::object();
    for (const auto& [sat, ref] : cal.cno->per_sat_ref)
      refs[std::to_string(sat)] = ref;
    j["cno"] = {{"per_sat_ref", refs},
                {"drop_threshold", cal.cno->drop_threshold},
                {"min_sats", cal.cno->min_sats},
                {"excluded", cal.cno->excluded},
                {"warnings", cal.cno->warnings}};
  } else {
    j["cno"] = nullptr;
  }
  j["warnings"] = cal.warnings;
  return j.dump(2) + "\n";
}

CalibrationFile calibration_from_json(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  CalibrationFile cal;
  const auto window = field<std::vector<double>>(j, "window", origin);
  if (window.size() != 2)
    throw ParseError(1, origin + ": 'window' must hold two numbers");
  cal.window_start_s = window[0];
  cal.window_end_s = window[1];
  cal.epochs_used = field<std::size_t>(j, "epochs_used", origin);
  const auto agc = field<json>(j, "agc", origin);
  if (!agc.is_null()) {
    AgcCalibration a;
    a.mu_ref = field<double>(agc, "mu_ref", origin);
    a.sigma_ref = field<double>(agc, "sigma_ref", origin);
    a.t_drop = field<double>(agc, "t_drop", origin);
    a.threshold = field<double>(agc, "threshold", origin);
    cal.agc = a;
  }
  const auto cno = field<json>(j, "cno", origin);
  if (!cno.is_null()) {
    CnoCalibration c;
    const json refs = field<json>(cno, "per_sat_ref", origin);
    for (const auto& [key, value] : refs.items()) {
      try {
        c.per_sat_ref[std::stoi(key)] = value.get<double>();
      } catch (const std::exception&) {
        throw ParseError(1, origin + ": bad per_sat_ref entry '" + key + "'");
      }
    }
    c.drop_threshold = field<double>(cno, "drop_threshold", origin);
    c.min_sats = field<int>(cno, "min_sats", origin);
    c.excluded = field<std::vector<SatId>>(cno, "excluded", origin);
    c.warnings = field<std::vector<std::string>>(cno, "warnings", origin);
    cal.cno = c;
  }
  cal.warnings = field<std::vector<std::string>>(j, "warnings", origin);
  return cal;
}

void write_calibration(const CalibrationFile& cal, const std::filesystem::path& path) {
  write_file(path, calibration_to_json(cal));
}

CalibrationFile read_calibration(const std::filesystem::path& path) {
  return calibration_from_json(read_file(path), path.string());
}

std::size_t write_verdict_log(std::span<const DetectorVerdict> verdicts, std::ostream& out) {
  std::size_t bytes = 0;
  for (const auto& v : verdicts) {
    ordered_json j;
    j["t"] = v.t;
    j["agc_flag"] = optional_bool(v.agc_flag);
    j["cno_flag"] = optional_bool(v.cno_flag);
    j["agc_db"] = optional_number(v.agc_db);
    j["agc_threshold"] = optional_number(v.agc_threshold);
    j["cno_dropping"] = v.cno_dropping;
    j["cno_present"] = v.cno_present;
    j["cno_quorum"] = v.cno_quorum;
    const std::string line = j.dump() + "\n";
    out << line;
    bytes += line.size();
  }
  if (!out)
    throw IoFailure("write failed while emitting verdict log");
  return bytes;
}

std::size_t write_verdict_log(std::span<const DetectorVerdict> verdicts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  return write_verdict_log(verdicts, out);
}

std::vector<DetectorVerdict> parse_verdict_log(std::istream& in) {
  std::vector<DetectorVerdict> verdicts;
  std::string text;
  std::size_t line = 0;
  auto opt_bool = [&](const json& j, const char* key) -> std::optional<bool> {
    const auto& v = j.at(key);
    if (v.is_null())
      return std::nullopt;
    if (!v.is_boolean())
      throw ParseError(line, std::string("'") + key + "' must be a boolean or null");
    return v.get<bool>();
  };
  auto opt_num = [&](const json& j, const char* key) -> std::optional<double> {
    const auto& v = j.at(key);
    if (v.is_null())
      return std::nullopt;
    if (!v.is_number())
      throw ParseError(line, std::string("'") + key + "' must be a number or null");
    return v.get<double>();
  };
  while (std::getline(in, text)) {
    ++line;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed verdict: ") + e.what());
    }
    static const char* keys[] = {"t", "agc_flag", "cno_flag", "agc_db", "agc_threshold",
                                 "cno_dropping", "cno_present", "cno_quorum"};
    if (!j.is_object() || j.size() != std::size(keys))
      throw ParseError(line, "verdict must be an object with exactly the documented fields");
    for (const char* k : keys)
      if (!j.contains(k))
        throw ParseError(line, std::string("missing field '") + k + "'");
    DetectorVerdict v;
    if (!j["t"].is_number())
      throw ParseError(line, "'t' must be a number");
    v.t = j["t"].get<double>();
    v.agc_flag = opt_bool(j, "agc_flag");
    v.cno_flag = opt_bool(j, "cno_flag");
    v.agc_db = opt_num(j, "agc_db");
    v.agc_threshold = opt_num(j, "agc_threshold");
    for (const char* k : {"cno_dropping", "cno_present", "cno_quorum"})
      if (!j[k].is_number_integer())
        throw ParseError(line, std::string("'") + k + "' must be an integer");
    v.cno_dropping = j["cno_dropping"].get<int>();
    v.cno_present = j["cno_present"].get<int>();
    v.cno_quorum = j["cno_quorum"].get<int>();
    if (!verdicts.empty() && !(v.t > verdicts.back().t))
      throw ParseError(line, "'t' is not strictly increasing");
    verdicts.push_back(v);
  }
  return verdicts;
}

std::vector<DetectorVerdict> parse_verdict_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  return parse_verdict_log(in);
}

std::string report_to_text(const MetricsReport& r, const std::string& prefix) {
  std::ostringstream out;
  auto kv = [&](const std::string& key, const std::string& value) { out << prefix << key << "=" << value << "\n"; };
  kv("intervals_detected", std::to_string(r.intervals_detected) + "/" + std::to_string(r.intervals_total));
  std::string per_interval;
  for (bool d : r.interval_detected)
    per_interval += d ? '1' : '0';
  kv("interval_mask", per_interval);
  kv("interval_misses", std::to_string(r.intervals_total - r.intervals_detected));
  kv("detection_probability", num(r.detection_probability));
  kv("missed_detection_rate", num(r.missed_detection_rate));
  kv("epoch_miss_rate", num(r.epoch_miss_rate));
  kv("false_alarm_rate", num(r.false_alarm_rate));
  kv("false_alarm_density", num(r.false_alarm_density));
  kv("tp", std::to_string(r.confusion.tp));
  kv("fp", std::to_string(r.confusion.fp));
  kv("fn", std::to_string(r.confusion.fn));
  kv("tn", std::to_string(r.confusion.tn));
  kv("excluded_epochs", std::to_string(r.excluded_epochs));
  kv("guard_band_s", num(r.guard_band_s));
  return out.str();
}

std::string report_to_json(const MetricsReport& r) {
  ordered_json j;
  j["intervals_detected"] = r.intervals_detected;
  j["intervals_total"] = r.intervals_total;
  j["interval_detected"] = r.interval_detected;
  j["detection_probability"] = r.detection_probability;
  j["missed_detection_rate"] = r.missed_detection_rate;
  j["epoch_miss_rate"] = r.epoch_miss_rate;
  j["false_alarm_rate"] = r.false_alarm_rate;
  j["false_alarm_density"] = r.false_alarm_density;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  j["excluded_epochs"] = r.excluded_epochs;
  j["false_alarm_times"] = r.false_alarm_times;
  j["guard_band_s"] = r.guard_band_s;
  return j.dump(2);
}

} // namespace jamwatch
