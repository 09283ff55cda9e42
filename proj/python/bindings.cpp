#include "jamwatch/detect.hpp"
#include "jamwatch/errors.hpp"
#include "jamwatch/frames.hpp"
#include "jamwatch/frontend.hpp"
#include "jamwatch/metrics.hpp"
#include "jamwatch/observables.hpp"
#include "jamwatch/records.hpp"
#include "jamwatch/scenario.hpp"
#include "jamwatch/simulate.hpp"
#include "jamwatch/tracking.hpp"
#include "jamwatch/waveform.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace jamwatch;

namespace {

py::array_t<std::complex<double>> to_numpy(const std::vector<Sample>& samples) {
  py::array_t<std::complex<double>> arr(std::vector<py::ssize_t>{static_cast<py::ssize_t>(samples.size())});
  std::copy(samples.begin(), samples.end(), arr.mutable_data());
  return arr;
}

std::vector<Sample> from_numpy(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 1)
    throw InvalidArgument("sample array must be one-dimensional");
  return {arr.data(), arr.data() + arr.size()};
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chirp-jamming simulation and AGC / C/N0 interference detection";

  auto base = py::register_exception<Error>(m, "JamwatchError");
  py::register_exception<NyquistViolation>(m, "NyquistViolation", base.ptr());
  py::register_exception<BufferMismatch>(m, "BufferMismatch", base.ptr());
  py::register_exception<EstimatorRangeError>(m, "EstimatorRangeError", base.ptr());
  py::register_exception<InsufficientCalibration>(m, "InsufficientCalibration", base.ptr());
  py::register_exception<MissingObservable>(m, "MissingObservable", base.ptr());
  py::register_exception<FrameError>(m, "FrameError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<TruthMismatch>(m, "TruthMismatch", base.ptr());

  // waveform
  py::class_<ChirpConfig>(m, "ChirpConfig")
      .def(py::init<>())
      .def_readwrite("power", &ChirpConfig::power)
      .def_readwrite("start_freq_hz", &ChirpConfig::start_freq_hz)
      .def_readwrite("phase_rad", &ChirpConfig::phase_rad)
      .def_readwrite("direction", &ChirpConfig::direction)
      .def_readwrite("sweep_period_s", &ChirpConfig::sweep_period_s)
      .def_readwrite("freq_min_hz", &ChirpConfig::freq_min_hz)
      .def_readwrite("freq_max_hz", &ChirpConfig::freq_max_hz)
      .def_readwrite("continuous_phase", &ChirpConfig::continuous_phase)
      .def_property_readonly("bandwidth", &ChirpConfig::bandwidth)
      .def("validate", &ChirpConfig::validate);

  py::class_<IqBuffer>(m, "IqBuffer")
      .def(py::init([](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> samples,
                       double sample_rate, double t0) {
             return IqBuffer{sample_rate, t0, from_numpy(samples)};
           }),
           py::arg("samples"), py::arg("sample_rate"), py::arg("t0") = 0.0)
      .def_readonly("sample_rate", &IqBuffer::sample_rate)
      .def_readonly("t0", &IqBuffer::t0)
      .def_property_readonly("samples", [](const IqBuffer& b) { return to_numpy(b.samples); })
      .def("mean_power", &IqBuffer::mean_power)
      .def("__len__", &IqBuffer::size);

  py::class_<JammingInterval>(m, "JammingInterval")
      .def(py::init<double, double, double>(), py::arg("start_s"), py::arg("end_s"), py::arg("jnr_db"))
      .def_readonly("start_s", &JammingInterval::start_s)
      .def_readonly("end_s", &JammingInterval::end_s)
      .def_readonly("jnr_db", &JammingInterval::jnr_db);

  py::class_<JammingSchedule>(m, "JammingSchedule")
      .def(py::init<>())
      .def(py::init<std::vector<JammingInterval>>())
      .def_property_readonly("intervals", &JammingSchedule::intervals)
      .def("jnr_at", &JammingSchedule::jnr_at)
      .def("__len__", &JammingSchedule::size);

  m.def("chirp_phase", &chirp_phase, py::arg("t"), py::arg("cfg"));
  m.def("chirp_frequency", &chirp_frequency, py::arg("t"), py::arg("cfg"));
  m.def("gen_chirp", &gen_chirp, py::arg("cfg"), py::arg("sample_rate"), py::arg("duration"), py::arg("t0") = 0.0);
  m.def("gen_noise", &gen_noise, py::arg("sample_rate"), py::arg("duration"), py::arg("noise_power"),
        py::arg("seed"), py::arg("t0") = 0.0);
  m.def("build_schedule", &build_schedule, py::arg("n_intervals"), py::arg("interval_len_s"), py::arg("gap_len_s"),
        py::arg("jnr_start_db"), py::arg("jnr_step_db"));
  m.def("combine", &combine, py::arg("signal"), py::arg("interference"), py::arg("schedule"),
        py::arg("reference_noise_power") = 1.0);

  // frontend
  py::class_<AgcConfig>(m, "AgcConfig")
      .def(py::init<>())
      .def_readwrite("target_power_db", &AgcConfig::target_power_db)
      .def_readwrite("loop_gain", &AgcConfig::loop_gain)
      .def_readwrite("block_len", &AgcConfig::block_len)
      .def_readwrite("gain_min_db", &AgcConfig::gain_min_db)
      .def_readwrite("gain_max_db", &AgcConfig::gain_max_db);
  py::class_<AgcState>(m, "AgcState")
      .def(py::init<double, double>(), py::arg("gain_db") = 0.0, py::arg("last_update_t") = 0.0)
      .def_readwrite("gain_db", &AgcState::gain_db)
      .def_readwrite("last_update_t", &AgcState::last_update_t);
  m.def(
      "agc_process",
      [](const IqBuffer& input, const AgcConfig& cfg, AgcState state) {
        auto out = agc_process(input, cfg, state);
        std::vector<std::pair<double, double>> trace;
        for (const auto& p : out.trace)
          trace.emplace_back(p.t, p.gain_db);
        return py::make_tuple(out.output, trace, state);
      },
      py::arg("input"), py::arg("cfg"), py::arg("state"),
      "Returns (scaled buffer, [(t, gain_db)], updated state).");
  m.def(
      "quantize",
      [](const IqBuffer& input, int bits, double full_scale) {
        auto r = quantize(input, bits, full_scale);
        return py::make_tuple(r.output, r.clip_fraction);
      },
      py::arg("input"), py::arg("bits"), py::arg("full_scale"));

  // tracking
  py::class_<CnoEstimatorConfig>(m, "CnoEstimatorConfig")
      .def(py::init<>())
      .def_readwrite("code_period_s", &CnoEstimatorConfig::code_period_s)
      .def_readwrite("coherent_blocks", &CnoEstimatorConfig::coherent_blocks)
      .def_readwrite("averaging", &CnoEstimatorConfig::averaging);
  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init<>())
      .def_readwrite("nominal_cn0_dbhz", &ChannelModel::nominal_cn0_dbhz)
      .def_readwrite("quality_factor", &ChannelModel::quality_factor)
      .def_readwrite("chip_rate", &ChannelModel::chip_rate);
  py::class_<CorrelatorBlock>(m, "CorrelatorBlock")
      .def(py::init([](std::vector<double> ip, std::vector<double> qp, double t, SatId sat) {
             return CorrelatorBlock{std::move(ip), std::move(qp), t, sat};
           }),
           py::arg("ip"), py::arg("qp"), py::arg("t") = 0.0, py::arg("sat") = 0)
      .def_readonly("ip", &CorrelatorBlock::ip)
      .def_readonly("qp", &CorrelatorBlock::qp)
      .def_readonly("t", &CorrelatorBlock::t)
      .def_readonly("sat", &CorrelatorBlock::sat);
  m.def("effective_cn0", &effective_cn0, py::arg("nominal_cn0_dbhz"), py::arg("js_db"), py::arg("model"));
  m.def("simulate_prompts", py::overload_cast<double, const CnoEstimatorConfig&, std::uint64_t>(&simulate_prompts),
        py::arg("cn0_dbhz"), py::arg("cfg"), py::arg("seed"));
  m.def("normalized_power", [](const std::vector<CorrelatorBlock>& blocks) { return normalized_power(blocks); },
        py::arg("blocks"));
  m.def("estimate_cno", &estimate_cno, py::arg("mu_na"), py::arg("cfg"));

  // detect
  py::class_<ObservableEpoch>(m, "ObservableEpoch")
      .def(py::init<>())
      .def(py::init([](double t, std::optional<double> agc, std::map<SatId, double> cno, std::vector<SatId> lost) {
             return ObservableEpoch{t, agc, std::move(cno), std::move(lost)};
           }),
           py::arg("t"), py::arg("agc_db") = py::none(), py::arg("cno_dbhz") = std::map<SatId, double>{},
           py::arg("lost") = std::vector<SatId>{})
      .def_readwrite("t", &ObservableEpoch::t)
      .def_readwrite("agc_db", &ObservableEpoch::agc_db)
      .def_readwrite("cno_dbhz", &ObservableEpoch::cno_dbhz)
      .def_readwrite("lost", &ObservableEpoch::lost)
      .def("__eq__", [](const ObservableEpoch& a, const ObservableEpoch& b) { return a == b; });
  py::class_<AgcCalibration>(m, "AgcCalibration")
      .def_readonly("mu_ref", &AgcCalibration::mu_ref)
      .def_readonly("sigma_ref", &AgcCalibration::sigma_ref)
      .def_readonly("t_drop", &AgcCalibration::t_drop)
      .def_readonly("threshold", &AgcCalibration::threshold);
  py::class_<CnoCalibration>(m, "CnoCalibration")
      .def_readonly("per_sat_ref", &CnoCalibration::per_sat_ref)
      .def_readonly("drop_threshold", &CnoCalibration::drop_threshold)
      .def_readonly("min_sats", &CnoCalibration::min_sats)
      .def_readonly("excluded", &CnoCalibration::excluded)
      .def_readonly("warnings", &CnoCalibration::warnings);
  m.def("calibrate_agc", [](const std::vector<double>& s, double t_drop) { return calibrate_agc(s, t_drop); },
        py::arg("samples"), py::arg("t_drop") = kDefaultAgcDropDb);
  m.def("agc_detect", &agc_detect, py::arg("epoch"), py::arg("cal"));
  m.def(
      "calibrate_cno",
      [](const std::vector<ObservableEpoch>& e, double drop, std::optional<int> min_sats) {
        return calibrate_cno(e, drop, min_sats);
      },
      py::arg("epochs"), py::arg("drop_threshold") = kDefaultCnoDropDb, py::arg("min_sats") = py::none());
  m.def("cno_detect", &cno_detect, py::arg("epoch"), py::arg("cal"));

  // metrics
  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](JammingSchedule s, double p) { return GroundTruth{std::move(s), p}; }), py::arg("intervals"),
           py::arg("epoch_period_s") = 1.0)
      .def_readonly("intervals", &GroundTruth::intervals)
      .def_readonly("epoch_period_s", &GroundTruth::epoch_period_s);
  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("intervals_detected", &MetricsReport::intervals_detected)
      .def_readonly("intervals_total", &MetricsReport::intervals_total)
      .def_readonly("interval_detected", &MetricsReport::interval_detected)
      .def_readonly("detection_probability", &MetricsReport::detection_probability)
      .def_readonly("missed_detection_rate", &MetricsReport::missed_detection_rate)
      .def_readonly("false_alarm_rate", &MetricsReport::false_alarm_rate)
      .def_readonly("false_alarm_density", &MetricsReport::false_alarm_density)
      .def_property_readonly("confusion", [](const MetricsReport& r) {
        return py::dict(py::arg("tp") = r.confusion.tp, py::arg("fp") = r.confusion.fp,
                        py::arg("fn") = r.confusion.fn, py::arg("tn") = r.confusion.tn);
      });
  m.def(
      "evaluate",
      [](const std::vector<std::pair<double, bool>>& flags, const GroundTruth& truth, double guard) {
        std::vector<FlagSample> f;
        for (const auto& [t, v] : flags)
          f.push_back({t, v});
        return evaluate(f, truth, guard);
      },
      py::arg("flags"), py::arg("truth"), py::arg("guard_band_s") = 0.0);
  m.def(
      "compare",
      [](const MetricsReport& a, const MetricsReport& b) { return compare(a, b).render(); },
      py::arg("report_a"), py::arg("report_b"), "Side-by-side comparison rendered as text.");

  // io
  m.def("crc16_xmodem", [](const py::bytes& b) { return crc16_xmodem(from_bytes(b)); });
  m.def(
      "encode_block", [](std::uint16_t id, const py::bytes& payload) { return as_bytes(encode_block(id, from_bytes(payload))); },
      py::arg("block_id"), py::arg("payload"));
  m.def(
      "decode_block",
      [](const py::bytes& frame) {
        auto d = decode_block(from_bytes(frame));
        return py::make_tuple(d.block_id, as_bytes(d.payload));
      },
      py::arg("frame"));
  m.def("encode_epochs", [](const std::vector<ObservableEpoch>& e) { return as_bytes(encode_epochs(e)); });
  m.def("decode_epochs", [](const py::bytes& b) { return decode_epochs(from_bytes(b)); });
  m.def("write_observable_log", [](const std::vector<ObservableEpoch>& e) {
    std::ostringstream out;
    write_observable_log(e, out);
    return out.str();
  });
  m.def("parse_observable_log", [](const std::string& text) {
    std::istringstream in(text);
    return parse_observable_log(in);
  });

  // scenario + simulation
  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("duration_s", &Scenario::duration_s)
      .def_readwrite("epoch_period_s", &Scenario::epoch_period_s)
      .def_readwrite("chirp", &Scenario::chirp)
      .def_readwrite("schedule", &Scenario::schedule)
      .def("to_json", &scenario_to_json);
  m.def("default_scenario", &default_scenario);
  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("origin") = "<string>");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def(
      "simulate",
      [](const Scenario& s, bool iq) {
        auto r = iq ? simulate_iq(s) : simulate_observables(s);
        return py::make_tuple(r.epochs, r.truth);
      },
      py::arg("scenario"), py::arg("iq") = false, "Returns (epochs, ground truth).");
}
