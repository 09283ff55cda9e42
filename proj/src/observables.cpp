#include "jamwatch/observables.hpp"

#include "jamwatch/errors.hpp"
#include "jamwatch/frames.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace jamwatch {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kCnoMax = 60.0;

SatId parse_sat_key(const std::string& key, std::size_t line) {
  SatId sat = 0;
  const auto* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(key.data(), end, sat);
  if (ec != std::errc{} || ptr != end || key.empty() || sat < 1 || sat > 255)
    throw ParseError(line, "satellite id '" + key + "' is not an integer in [1, 255]");
  return sat;
}

SatId parse_sat_value(const ordered_json& v, std::size_t line) {
  if (!v.is_number_integer())
    throw ParseError(line, "lost satellite ids must be integers");
  const auto sat = v.get<long long>();
  if (sat < 1 || sat > 255)
    throw ParseError(line, "lost satellite id out of range [1, 255]");
  return static_cast<SatId>(sat);
}

ObservableEpoch parse_record(const std::string& text, std::size_t line) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed record: ") + e.what());
  }
  if (!j.is_object())
    throw ParseError(line, "record is not an object");
  for (const auto& [key, _] : j.items())
    if (key != "t" && key != "agc_db" && key != "cno" && key != "lost")
      throw ParseError(line, "unknown field '" + key + "'");
  for (const char* key : {"t", "agc_db", "cno", "lost"})
    if (!j.contains(key))
      throw ParseError(line, std::string("missing field '") + key + "'");

  ObservableEpoch epoch;
  if (!j["t"].is_number())
    throw ParseError(line, "'t' must be a number");
  epoch.t = j["t"].get<double>();
  if (!(epoch.t >= 0.0) || !std::isfinite(epoch.t))
    throw ParseError(line, "'t' must be finite and non-negative");

  const auto& agc = j["agc_db"];
  if (agc.is_number())
    epoch.agc_db = agc.get<double>();
  else if (!agc.is_null())
    throw ParseError(line, "'agc_db' must be a number or null");

  const auto& cno = j["cno"];
  if (!cno.is_object())
    throw ParseError(line, "'cno' must be an object");
  for (const auto& [key, value] : cno.items()) {
    if (!value.is_number())
      throw ParseError(line, "C/N0 of satellite " + key + " is not a number");
    const double v = value.get<double>();
    if (!(v >= 0.0 && v <= kCnoMax))
      throw ParseError(line, "C/N0 of satellite " + key + " outside [0, 60] dB-Hz");
    if (!epoch.cno_dbhz.emplace(parse_sat_key(key, line), v).second)
      throw ParseError(line, "duplicate satellite " + key);
  }

  const auto& lost = j["lost"];
  if (!lost.is_array())
    throw ParseError(line, "'lost' must be an array");
  for (const auto& v : lost)
    epoch.lost.push_back(parse_sat_value(v, line));
  return epoch;
}

} // namespace

void validate_epochs(std::span<const ObservableEpoch> epochs) {
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const auto& e = epochs[k];
    if (!(e.t >= 0.0) || !std::isfinite(e.t))
      throw InvalidArgument("epoch " + std::to_string(k) + ": t must be finite and non-negative");
    if (k > 0 && !(e.t > epochs[k - 1].t))
      throw InvalidArgument("epoch " + std::to_string(k) + ": t is not strictly increasing");
    if (e.agc_db && !std::isfinite(*e.agc_db))
      throw InvalidArgument("epoch " + std::to_string(k) + ": AGC value is not finite");
    for (const auto& [sat, v] : e.cno_dbhz) {
      if (sat < 1 || sat > 255)
        throw InvalidArgument("epoch " + std::to_string(k) + ": satellite id out of range");
      if (!(v >= 0.0 && v <= kCnoMax))
        throw InvalidArgument("epoch " + std::to_string(k) + ": C/N0 outside [0, 60] dB-Hz");
    }
    for (SatId sat : e.lost)
      if (sat < 1 || sat > 255)
        throw InvalidArgument("epoch " + std::to_string(k) + ": lost satellite id out of range");
  }
}

std::size_t write_observable_log(std::span<const ObservableEpoch> epochs, std::ostream& out) {
  validate_epochs(epochs);
  std::size_t bytes = 0;
  for (const auto& e : epochs) {
    ordered_json j;
    j["t"] = e.t;
    j["agc_db"] = e.agc_db ? ordered_json(*e.agc_db) : ordered_json(nullptr);
    ordered_json cno = ordered_json::object();
    for (const auto& [sat, v] : e.cno_dbhz)
      cno[std::to_string(sat)] = v;
    j["cno"] = std::move(cno);
    j["lost"] = e.lost;
    const std::string line = j.dump() + "\n";
    out << line;
    bytes += line.size();
  }
  if (!out)
    throw IoFailure("write failed while emitting observable log");
  return bytes;
}

std::size_t write_observable_log(std::span<const ObservableEpoch> epochs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  return write_observable_log(epochs, out);
}

std::vector<ObservableEpoch> parse_observable_log(std::istream& in) {
  std::vector<ObservableEpoch> epochs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty())
      throw ParseError(line, "empty record");
    auto epoch = parse_record(text, line);
    if (!epochs.empty() && !(epoch.t > epochs.back().t))
      throw ParseError(line, "'t' is not strictly increasing");
    epochs.push_back(std::move(epoch));
  }
  return epochs;
}

std::vector<ObservableEpoch> parse_observable_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  return parse_observable_log(in);
}

std::vector<ObservableEpoch> load_observables(const std::filesystem::path& path) {
  if (path.extension() == ".blk")
    return read_frame_log(path);
  return parse_observable_log(path);
}

} // namespace jamwatch
