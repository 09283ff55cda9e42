#include "jamwatch/scenario.hpp"

#include "jamwatch/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace jamwatch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Reads keys of one JSON object, remembering which ones were consumed so
/// leftovers can be reported as unknown.
class Section {
public:
  Section(const json& node, std::string prefix, const std::string& origin)
      : node_(node), prefix_(std::move(prefix)), origin_(origin) {
    if (!node_.is_object())
      fail_at(prefix_.empty() ? "<root>" : prefix_, "must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key, double fallback) {
    const json* v = take(key);
    if (!v)
      return fallback;
    if (!v->is_number())
      fail(key, "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d))
      fail(key, "must be finite");
    return d;
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = take(key);
    if (!v)
      return fallback;
    if (!v->is_number_integer())
      fail(key, "expected an integer");
    return v->get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = take(key);
    if (!v)
      return fallback;
    if (!v->is_number_unsigned())
      fail(key, "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (!v)
      return fallback;
    if (!v->is_boolean())
      fail(key, "expected true or false");
    return v->get<bool>();
  }

  const json* raw(const std::string& key) { return take(key); }

  Section child(const std::string& key) {
    static const json empty = json::object();
    const json* v = take(key);
    return Section(v ? *v : empty, path(key), origin_);
  }

  void finish() const {
    for (const auto& [key, _] : node_.items())
      if (!used_.count(key))
        fail(key, "unknown key");
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& reason) const { fail_at(path(key), reason); }

  [[noreturn]] void fail_at(const std::string& dotted, const std::string& reason) const {
    throw ConfigError(origin_, dotted, reason);
  }

private:
  const json* take(const std::string& key) {
    used_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string prefix_;
  const std::string& origin_;
  std::set<std::string> used_;
};

std::vector<SatelliteConfig> default_satellites() {
  return {{2, 48.0}, {5, 46.0}, {7, 45.0}, {13, 44.0}, {15, 43.0}, {20, 42.0}, {24, 40.0}, {30, 38.0}};
}

ChirpConfig default_scenario_chirp() {
  ChirpConfig c;
  c.power = 1.0;
  c.start_freq_hz = -250e3;
  c.freq_min_hz = -250e3;
  c.freq_max_hz = 250e3;
  c.sweep_period_s = 100e-6;
  return c;
}

template <class F>
void check(bool ok, const std::string& origin, const std::string& key, F&& reason) {
  if (!ok)
    throw ConfigError(origin, key, reason());
}

} // namespace

AgcConfig FrontendConfig::agc_config() const {
  AgcConfig cfg;
  cfg.target_power_db = target_power_db;
  cfg.loop_gain = loop_gain;
  cfg.block_len = AgcConfig::block_len_for(bandwidth_hz, block_duration_s);
  cfg.gain_min_db = gain_min_db;
  cfg.gain_max_db = gain_max_db;
  return cfg;
}

double FrontendConfig::noise_power() const noexcept { return std::pow(10.0, noise_power_db / 10.0); }

std::size_t Scenario::epoch_count() const {
  return static_cast<std::size_t>(std::floor(duration_s / epoch_period_s + 1e-9));
}

std::pair<double, double> chirp_band(const ChirpConfig& chirp) noexcept {
  const double b = chirp.bandwidth();
  return chirp.direction > 0 ? std::pair{chirp.start_freq_hz, chirp.start_freq_hz + b}
                             : std::pair{chirp.start_freq_hz - b, chirp.start_freq_hz};
}

double resolved_quality_factor(const Scenario& scenario) {
  if (scenario.tracking.quality_factor)
    return *scenario.tracking.quality_factor;
  const auto [lo, hi] = chirp_band(scenario.chirp);
  return spectral_quality_factor(lo, hi, scenario.tracking.chip_rate, scenario.frontend.bandwidth_hz);
}

void Scenario::validate(const std::string& origin) const {
  const std::string& o = origin;
  auto wrap = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(o, key, e.what());
    }
  };
  check(duration_s > 0.0, o, "duration_s", [] { return "must be > 0"; });
  check(epoch_period_s > 0.0, o, "epoch_period_s", [] { return "must be > 0"; });
  check(epoch_count() >= 1, o, "duration_s", [] { return "shorter than one epoch"; });
  wrap("chirp", [&] { chirp.validate(); });
  wrap("schedule", [&] { JammingSchedule copy(schedule.intervals()); });
  if (!schedule.empty())
    check(schedule.intervals().back().end_s <= duration_s, o, "schedule",
          [] { return "schedule extends beyond duration_s"; });

  check(frontend.bandwidth_hz > 0.0, o, "frontend.bandwidth_hz", [] { return "must be > 0"; });
  check(frontend.adc_bits >= 2 && frontend.adc_bits <= 16, o, "frontend.adc_bits", [] { return "must lie in [2, 16]"; });
  check(frontend.jitter_db >= 0.0, o, "frontend.jitter_db", [] { return "must be >= 0"; });
  wrap("frontend", [&] { frontend.agc_config().validate(); });
  check(chirp_min_sample_rate(chirp) <= frontend.bandwidth_hz, o, "chirp",
        [] { return "chirp band violates the Nyquist guard at frontend.bandwidth_hz"; });

  wrap("tracking", [&] { tracking.estimator.validate(); });
  check(tracking.estimator.span_s() <= epoch_period_s * (1.0 + 1e-9), o, "tracking.averaging",
        [] { return "K*M*T exceeds the epoch period"; });
  check(!tracking.quality_factor || *tracking.quality_factor > 0.0, o, "tracking.quality_factor",
        [] { return "must be > 0 or \"auto\""; });
  check(tracking.chip_rate > 0.0, o, "tracking.chip_rate", [] { return "must be > 0"; });
  check(tracking.reacquisition_delay_s >= 0.0, o, "tracking.reacquisition_delay_s", [] { return "must be >= 0"; });
  check(!tracking.satellites.empty(), o, "tracking.satellites", [] { return "at least one satellite required"; });
  std::set<SatId> ids;
  for (const auto& s : tracking.satellites) {
    check(s.id >= 1 && s.id <= 255, o, "tracking.satellites", [] { return "satellite id must lie in [1, 255]"; });
    check(ids.insert(s.id).second, o, "tracking.satellites", [&] { return "duplicate satellite id " + std::to_string(s.id); });
    wrap("tracking.satellites", [&] {
      ChannelModel{s.nominal_cn0_dbhz, 1.0, tracking.chip_rate}.validate();
    });
  }

  check(detect.t_drop_db >= 0.0, o, "detect.t_drop_db", [] { return "must be >= 0"; });
  check(detect.drop_threshold_db > 0.0, o, "detect.drop_threshold_db", [] { return "must be > 0"; });
  check(!detect.min_sats || *detect.min_sats >= 1, o, "detect.min_sats", [] { return "must be >= 1"; });
  check(detect.debounce >= 1, o, "detect.debounce", [] { return "must be >= 1"; });
  if (detect.calibration_window)
    check(detect.calibration_window->second > detect.calibration_window->first, o, "detect.calibration_window",
          [] { return "end must exceed start"; });
}

Scenario default_scenario() {
  Scenario s;
  s.chirp = default_scenario_chirp();
  s.schedule_params = ScheduleParams{};
  const auto& p = *s.schedule_params;
  s.schedule = build_schedule(p.n_intervals, p.interval_len_s, p.gap_len_s, p.jnr_start_db, p.jnr_step_db);
  s.tracking.satellites = default_satellites();
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin, "<root>", std::string("malformed JSON: ") + e.what());
  }

  Scenario s = default_scenario();
  Section top(root, "", origin);
  s.seed = top.unsigned_integer("seed", s.seed);
  s.duration_s = top.number("duration_s", s.duration_s);
  s.epoch_period_s = top.number("epoch_period_s", s.epoch_period_s);

  {
    auto c = top.child("chirp");
    s.chirp.power = c.number("power", s.chirp.power);
    s.chirp.start_freq_hz = c.number("start_freq_hz", s.chirp.start_freq_hz);
    s.chirp.phase_rad = c.number("phase_rad", s.chirp.phase_rad);
    s.chirp.direction = static_cast<int>(c.integer("direction", s.chirp.direction));
    s.chirp.sweep_period_s = c.number("sweep_period_s", s.chirp.sweep_period_s);
    s.chirp.freq_min_hz = c.number("freq_min_hz", s.chirp.freq_min_hz);
    s.chirp.freq_max_hz = c.number("freq_max_hz", s.chirp.freq_max_hz);
    s.chirp.continuous_phase = c.boolean("continuous_phase", s.chirp.continuous_phase);
    c.finish();
  }

  {
    auto c = top.child("schedule");
    if (c.has("intervals")) {
      for (const char* k : {"n_intervals", "interval_len_s", "gap_len_s", "jnr_start_db", "jnr_step_db"})
        if (c.has(k))
          c.fail(k, "cannot be combined with an explicit interval list");
      const json* list = c.raw("intervals");
      if (!list->is_array())
        c.fail("intervals", "expected an array");
      std::vector<JammingInterval> intervals;
      for (std::size_t k = 0; k < list->size(); ++k) {
        Section iv((*list)[k], c.path("intervals") + "[" + std::to_string(k) + "]", origin);
        JammingInterval parsed;
        parsed.start_s = iv.number("start_s", std::numeric_limits<double>::quiet_NaN());
        parsed.end_s = iv.number("end_s", std::numeric_limits<double>::quiet_NaN());
        parsed.jnr_db = iv.number("jnr_db", std::numeric_limits<double>::quiet_NaN());
        for (const char* req : {"start_s", "end_s", "jnr_db"})
          if (!(*list)[k].contains(req))
            iv.fail(req, "required");
        iv.finish();
        intervals.push_back(parsed);
      }
      try {
        s.schedule = JammingSchedule(std::move(intervals));
      } catch (const InvalidArgument& e) {
        c.fail("intervals", std::string("schedule invariant violated: ") + e.what());
      }
      s.schedule_params.reset();
    } else {
      ScheduleParams p;
      p.n_intervals = static_cast<int>(c.integer("n_intervals", p.n_intervals));
      p.interval_len_s = c.number("interval_len_s", p.interval_len_s);
      p.gap_len_s = c.number("gap_len_s", p.gap_len_s);
      p.jnr_start_db = c.number("jnr_start_db", p.jnr_start_db);
      p.jnr_step_db = c.number("jnr_step_db", p.jnr_step_db);
      try {
        s.schedule = build_schedule(p.n_intervals, p.interval_len_s, p.gap_len_s, p.jnr_start_db, p.jnr_step_db);
      } catch (const InvalidArgument& e) {
        c.fail_at(c.path("n_intervals"), std::string("schedule invariant violated: ") + e.what());
      }
      s.schedule_params = p;
    }
    c.finish();
  }

  {
    auto c = top.child("frontend");
    auto& f = s.frontend;
    f.noise_power_db = c.number("noise_power_db", f.noise_power_db);
    f.bandwidth_hz = c.number("bandwidth_hz", f.bandwidth_hz);
    f.target_power_db = c.number("target_power_db", f.target_power_db);
    f.loop_gain = c.number("loop_gain", f.loop_gain);
    f.block_duration_s = c.number("block_duration_s", f.block_duration_s);
    f.gain_min_db = c.number("gain_min_db", f.gain_min_db);
    f.gain_max_db = c.number("gain_max_db", f.gain_max_db);
    f.jitter_db = c.number("jitter_db", f.jitter_db);
    f.adc_bits = static_cast<int>(c.integer("adc_bits", f.adc_bits));
    f.adc_backoff_db = c.number("adc_backoff_db", f.adc_backoff_db);
    c.finish();
  }

  {
    auto c = top.child("tracking");
    auto& t = s.tracking;
    t.estimator.code_period_s = c.number("code_period_s", t.estimator.code_period_s);
    t.estimator.coherent_blocks = static_cast<int>(c.integer("coherent_blocks", t.estimator.coherent_blocks));
    t.estimator.averaging = static_cast<int>(c.integer("averaging", t.estimator.averaging));
    if (const json* q = c.raw("quality_factor")) {
      if (q->is_string() && q->get<std::string>() == "auto")
        t.quality_factor.reset();
      else if (q->is_number())
        t.quality_factor = q->get<double>();
      else
        c.fail("quality_factor", "expected a number or \"auto\"");
    }
    t.chip_rate = c.number("chip_rate", t.chip_rate);
    t.tracking_threshold_dbhz = c.number("tracking_threshold_dbhz", t.tracking_threshold_dbhz);
    t.reacquisition_delay_s = c.number("reacquisition_delay_s", t.reacquisition_delay_s);
    if (const json* sats = c.raw("satellites")) {
      if (!sats->is_array())
        c.fail("satellites", "expected an array");
      t.satellites.clear();
      for (std::size_t k = 0; k < sats->size(); ++k) {
        Section sat((*sats)[k], c.path("satellites") + "[" + std::to_string(k) + "]", origin);
        if (!(*sats)[k].contains("id"))
          sat.fail("id", "required");
        SatelliteConfig sc;
        sc.id = static_cast<SatId>(sat.integer("id", 0));
        sc.nominal_cn0_dbhz = sat.number("cn0_dbhz", sc.nominal_cn0_dbhz);
        sat.finish();
        t.satellites.push_back(sc);
      }
    }
    c.finish();
  }

  {
    auto c = top.child("detect");
    auto& d = s.detect;
    d.t_drop_db = c.number("t_drop_db", d.t_drop_db);
    d.drop_threshold_db = c.number("drop_threshold_db", d.drop_threshold_db);
    if (c.has("min_sats"))
      d.min_sats = static_cast<int>(c.integer("min_sats", 0));
    d.debounce = static_cast<int>(c.integer("debounce", d.debounce));
    d.contamination_sigma_db = c.number("contamination_sigma_db", d.contamination_sigma_db);
    if (const json* w = c.raw("calibration_window")) {
      if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number() || !(*w)[1].is_number())
        c.fail("calibration_window", "expected [start_s, end_s]");
      d.calibration_window = std::pair{(*w)[0].get<double>(), (*w)[1].get<double>()};
    }
    c.finish();
  }
  top.finish();

  s.validate(origin);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path.string(), "<file>", "cannot open scenario file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["seed"] = s.seed;
  j["duration_s"] = s.duration_s;
  j["epoch_period_s"] = s.epoch_period_s;
  j["chirp"] = {{"power", s.chirp.power},
                {"start_freq_hz", s.chirp.start_freq_hz},
                {"phase_rad", s.chirp.phase_rad},
                {"direction", s.chirp.direction},
                {"sweep_period_s", s.chirp.sweep_period_s},
                {"freq_min_hz", s.chirp.freq_min_hz},
                {"freq_max_hz", s.chirp.freq_max_hz},
                {"continuous_phase", s.chirp.continuous_phase}};
  ordered_json intervals = ordered_json::array();
  for (const auto& iv : s.schedule.intervals())
    intervals.push_back({{"start_s", iv.start_s}, {"end_s", iv.end_s}, {"jnr_db", iv.jnr_db}});
  j["schedule"] = {{"intervals", intervals}};
  const auto& f = s.frontend;
  j["frontend"] = {{"noise_power_db", f.noise_power_db}, {"bandwidth_hz", f.bandwidth_hz},
                   {"target_power_db", f.target_power_db}, {"loop_gain", f.loop_gain},
                   {"block_duration_s", f.block_duration_s}, {"gain_min_db", f.gain_min_db},
                   {"gain_max_db", f.gain_max_db}, {"jitter_db", f.jitter_db},
                   {"adc_bits", f.adc_bits}, {"adc_backoff_db", f.adc_backoff_db}};
  const auto& t = s.tracking;
  ordered_json sats = ordered_json::array();
  for (const auto& sat : t.satellites)
    sats.push_back({{"id", sat.id}, {"cn0_dbhz", sat.nominal_cn0_dbhz}});
  j["tracking"] = {{"code_period_s", t.estimator.code_period_s},
                   {"coherent_blocks", t.estimator.coherent_blocks},
                   {"averaging", t.estimator.averaging},
                   {"quality_factor", t.quality_factor ? ordered_json(*t.quality_factor) : ordered_json("auto")},
                   {"chip_rate", t.chip_rate},
                   {"tracking_threshold_dbhz", t.tracking_threshold_dbhz},
                   {"reacquisition_delay_s", t.reacquisition_delay_s},
                   {"satellites", sats}};
  const auto& d = s.detect;
  ordered_json det = {{"t_drop_db", d.t_drop_db},
                      {"drop_threshold_db", d.drop_threshold_db},
                      {"debounce", d.debounce},
                      {"contamination_sigma_db", d.contamination_sigma_db}};
  if (d.min_sats)
    det["min_sats"] = *d.min_sats;
  if (d.calibration_window)
    det["calibration_window"] = {d.calibration_window->first, d.calibration_window->second};
  j["detect"] = det;
  return j.dump(2);
}

} // namespace jamwatch
