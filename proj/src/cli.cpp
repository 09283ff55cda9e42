#include "jamwatch/cli.hpp"

#include "jamwatch/errors.hpp"
#include "jamwatch/frames.hpp"
#include "jamwatch/simulate.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace jamwatch::cli {

namespace fs = std::filesystem;

namespace {

using ordered_json = nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  out << text;
  if (!out)
    throw IoFailure("write failed on " + path.string());
}

std::string num(double v) { return ordered_json(v).dump(); }

double parse_double(const std::string& text, const fs::path& file, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw ParseError(line, file.string() + ": '" + text + "' is not a number");
  return v;
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ParseError(1, path.string() + ": expected header '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t'))
      cols.push_back(col);
    rows.push_back(std::move(cols));
  }
  return rows;
}

Scenario scenario_or_default(const std::optional<fs::path>& config) {
  return config ? load_scenario(*config) : default_scenario();
}

} // namespace

fs::path resolve_out_dir(const std::optional<fs::path>& out, const fs::path& fallback) {
  if (out)
    return *out;
  if (const char* env = std::getenv(kOutDirEnv); env && *env)
    return env;
  return fallback;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InvalidArgument("window must be START:END, got '" + text + "'");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double start = std::stod(a, &used_a);
    const double end = std::stod(b, &used_b);
    if (used_a != a.size() || used_b != b.size())
      throw InvalidArgument("trailing characters");
    if (!(end > start))
      throw InvalidArgument("window end must exceed start");
    return {start, end};
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("bad window '" + text + "': " + e.what());
  } catch (const std::exception&) {
    throw InvalidArgument("bad window '" + text + "': not numeric");
  }
}

std::string config_hash(const Scenario& scenario) {
  const std::string canonical = scenario_to_json(scenario);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

SimulateOutputs cmd_simulate(const SimulateOptions& options) {
  Scenario scenario = scenario_or_default(options.config);
  if (options.seed)
    scenario.seed = *options.seed;
  fs::create_directories(options.out_dir);

  SimulationResult result;
  if (options.iq) {
    IqRunOptions iq;
    iq.dump_path = options.dump_iq;
    result = simulate_iq(scenario, iq);
  } else {
    result = simulate_observables(scenario);
  }

  SimulateOutputs out;
  out.log = options.out_dir / "observables.obs.jsonl";
  out.truth = options.out_dir / "truth.json";
  out.manifest = options.out_dir / "manifest.json";
  out.epochs = result.epochs.size();
  write_observable_log(result.epochs, out.log);
  write_truth(result.truth, out.truth);
  if (options.binary) {
    out.binary_log = options.out_dir / "observables.blk";
    write_frame_log(result.epochs, *out.binary_log);
  }

  ordered_json manifest;
  manifest["tool"] = "jamwatch";
  manifest["tool_version"] = kToolVersion;
  manifest["config_hash"] = config_hash(scenario);
  manifest["seed"] = scenario.seed;
  manifest["mode"] = options.iq ? "iq" : "observable";
  manifest["created_utc"] = utc_now();
  manifest["inputs"] = {{"config", options.config ? options.config->string() : std::string("<defaults>")}};
  ordered_json outputs = {{"log", out.log.string()}, {"truth", out.truth.string()}};
  if (out.binary_log)
    outputs["binary_log"] = out.binary_log->string();
  if (options.dump_iq)
    outputs["iq_dump"] = options.dump_iq->string();
  manifest["outputs"] = outputs;
  manifest["scenario"] = ordered_json::parse(scenario_to_json(scenario));
  write_text(out.manifest, manifest.dump(2) + "\n");
  return out;
}

CalibrationFile cmd_calibrate(const CalibrateOptions& options) {
  const Scenario scenario = scenario_or_default(options.config);
  const auto window = options.window ? options.window : scenario.detect.calibration_window;
  if (!window)
    throw InvalidArgument("a calibration window is required (--window START:END)");
  const auto epochs = load_observables(options.log);
  if (epochs.empty())
    throw InsufficientCalibration("log " + options.log.string() + " holds no epochs");
  if (window->first < epochs.front().t || window->first > epochs.back().t)
    throw InsufficientCalibration("calibration window does not lie inside the log");

  std::vector<ObservableEpoch> selected;
  std::vector<double> agc;
  for (const auto& e : epochs) {
    if (e.t >= window->first && e.t < window->second) {
      selected.push_back(e);
      if (e.agc_db)
        agc.push_back(*e.agc_db);
    }
  }
  if (selected.empty())
    throw InsufficientCalibration("calibration window contains no epochs");

  CalibrationFile cal;
  cal.window_start_s = window->first;
  cal.window_end_s = window->second;
  cal.epochs_used = selected.size();
  cal.agc = calibrate_agc(agc, scenario.detect.t_drop_db);
  if (cal.agc->sigma_ref > scenario.detect.contamination_sigma_db)
    cal.warnings.push_back("AGC sigma_ref " + num(cal.agc->sigma_ref) + " dB exceeds " +
                           num(scenario.detect.contamination_sigma_db) +
                           " dB: calibration window is probably contaminated by interference");
  cal.cno = calibrate_cno(selected, scenario.detect.drop_threshold_db, scenario.detect.min_sats);
  for (const auto& w : cal.cno->warnings)
    cal.warnings.push_back(w);
  write_calibration(cal, options.out);
  return cal;
}

DetectOutputs cmd_detect(const DetectOptions& options) {
  const auto epochs = load_observables(options.log);
  const auto cal = read_calibration(options.calibration);
  DetectOutputs out;
  if (cal.cno) {
    std::set<SatId> seen;
    for (const auto& e : epochs) {
      for (const auto& [sat, _] : e.cno_dbhz)
        seen.insert(sat);
      seen.insert(e.lost.begin(), e.lost.end());
    }
    for (const auto& [sat, _] : cal.cno->per_sat_ref)
      if (!seen.count(sat))
        out.warnings.push_back("calibrated satellite " + std::to_string(sat) + " never appears in the log");
  }
  DetectorOptions det;
  det.debounce = options.debounce;
  out.verdicts = run_detectors(epochs, cal.agc, cal.cno, det);
  write_verdict_log(out.verdicts, options.out);
  return out;
}

std::vector<FlagSample> agc_flags(std::span<const DetectorVerdict> verdicts) {
  std::vector<FlagSample> flags;
  flags.reserve(verdicts.size());
  for (const auto& v : verdicts)
    flags.push_back({v.t, v.agc_flag.value_or(false)});
  return flags;
}

std::vector<FlagSample> cno_flags(std::span<const DetectorVerdict> verdicts) {
  std::vector<FlagSample> flags;
  flags.reserve(verdicts.size());
  for (const auto& v : verdicts)
    flags.push_back({v.t, v.cno_flag.value_or(false)});
  return flags;
}

EvaluateOutputs cmd_evaluate(const EvaluateOptions& options) {
  const auto verdicts = parse_verdict_log(options.verdicts);
  const auto truth = read_truth(options.truth);
  if (!verdicts.empty() && verdicts.size() > 1) {
    const double step = verdicts[1].t - verdicts[0].t;
    if (std::abs(step - truth.epoch_period_s) > 1e-6)
      throw TruthMismatch("verdict epoch spacing differs from the truth epoch period");
  }
  EvaluateOutputs out{evaluate(agc_flags(verdicts), truth, options.guard_band_s),
                      evaluate(cno_flags(verdicts), truth, options.guard_band_s), {}};
  out.table = compare(out.agc, out.cno);

  fs::create_directories(options.out_dir);
  write_text(options.out_dir / "report.txt", report_to_text(out.agc, "agc.") + report_to_text(out.cno, "cno."));
  write_text(options.out_dir / "report.json", "{\n\"agc\": " + report_to_json(out.agc) +
                                                  ",\n\"cno\": " + report_to_json(out.cno) + "\n}\n");
  write_text(options.out_dir / "comparison.txt", out.table.render());
  return out;
}

void write_series(const PlotSeries& series, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ostringstream agc, cno, flags;
  agc << "t\tagc_db\n";
  cno << "t\tsat\tcno_dbhz\n";
  flags << "t\tagc_flag\tcno_flag\n";
  for (const auto& e : series.epochs) {
    agc << num(e.t) << '\t' << (e.agc_db ? num(*e.agc_db) : "null") << '\n';
    for (const auto& [sat, v] : e.cno_dbhz)
      cno << num(e.t) << '\t' << sat << '\t' << num(v) << '\n';
    for (SatId sat : e.lost)
      cno << num(e.t) << '\t' << sat << "\tlost\n";
  }
  auto flag = [](const std::optional<bool>& f) { return f ? (*f ? "1" : "0") : "null"; };
  if (!series.epochs.empty()) {
    std::map<double, const DetectorVerdict*> by_t;
    for (const auto& v : series.verdicts)
      by_t[v.t] = &v;
    for (const auto& e : series.epochs) {
      const auto it = by_t.find(e.t);
      const DetectorVerdict* v = it == by_t.end() ? nullptr : it->second;
      flags << num(e.t) << '\t' << (v ? flag(v->agc_flag) : "null") << '\t' << (v ? flag(v->cno_flag) : "null")
            << '\n';
    }
  } else {
    for (const auto& v : series.verdicts)
      flags << num(v.t) << '\t' << flag(v.agc_flag) << '\t' << flag(v.cno_flag) << '\n';
  }
  write_text(out_dir / "agc.tsv", agc.str());
  write_text(out_dir / "cno.tsv", cno.str());
  write_text(out_dir / "flags.tsv", flags.str());
}

PlotSeries read_series(const fs::path& dir) {
  PlotSeries series;
  std::map<double, ObservableEpoch> epochs;
  std::size_t line = 1;
  for (const auto& row : read_tsv(dir / "agc.tsv", "t\tagc_db")) {
    ++line;
    if (row.size() != 2)
      throw ParseError(line, "agc.tsv: expected 2 columns");
    auto& e = epochs[parse_double(row[0], dir / "agc.tsv", line)];
    e.t = parse_double(row[0], dir / "agc.tsv", line);
    if (row[1] != "null")
      e.agc_db = parse_double(row[1], dir / "agc.tsv", line);
  }
  line = 1;
  for (const auto& row : read_tsv(dir / "cno.tsv", "t\tsat\tcno_dbhz")) {
    ++line;
    if (row.size() != 3)
      throw ParseError(line, "cno.tsv: expected 3 columns");
    const double t = parse_double(row[0], dir / "cno.tsv", line);
    auto& e = epochs[t];
    e.t = t;
    const auto sat = static_cast<SatId>(parse_double(row[1], dir / "cno.tsv", line));
    if (row[2] == "lost")
      e.lost.push_back(sat);
    else
      e.cno_dbhz[sat] = parse_double(row[2], dir / "cno.tsv", line);
  }
  for (auto& [_, e] : epochs)
    series.epochs.push_back(std::move(e));

  line = 1;
  auto flag = [&](const std::string& s) -> std::optional<bool> {
    if (s == "null")
      return std::nullopt;
    if (s == "1" || s == "0")
      return s == "1";
    throw ParseError(line, "flags.tsv: bad flag '" + s + "'");
  };
  for (const auto& row : read_tsv(dir / "flags.tsv", "t\tagc_flag\tcno_flag")) {
    ++line;
    if (row.size() != 3)
      throw ParseError(line, "flags.tsv: expected 3 columns");
    DetectorVerdict v;
    v.t = parse_double(row[0], dir / "flags.tsv", line);
    v.agc_flag = flag(row[1]);
    v.cno_flag = flag(row[2]);
    series.verdicts.push_back(v);
  }
  return series;
}

void cmd_export_plot(const ExportOptions& options) {
  PlotSeries series;
  if (options.series) {
    if (options.log || options.verdicts)
      throw InvalidArgument("--series cannot be combined with --log or --verdicts");
    series = read_series(*options.series);
  } else {
    if (!options.log && !options.verdicts)
      throw InvalidArgument("export-plot needs --log, --verdicts or --series");
    if (options.log)
      series.epochs = load_observables(*options.log);
    if (options.verdicts)
      series.verdicts = parse_verdict_log(*options.verdicts);
  }
  write_series(series, options.out_dir);
}

} // namespace jamwatch::cli
