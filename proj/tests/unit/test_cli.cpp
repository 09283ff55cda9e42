#include "doctest.h"
#include "support.hpp"

#include "jamwatch/cli.hpp"
#include "jamwatch/errors.hpp"
#include "jamwatch/records.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace jamwatch;
using namespace jamwatch::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Short scenario: 3 intervals, 40 s clean lead-in.
const char* kShort = R"({
  "duration_s": 160,
  "schedule": {"n_intervals": 3, "interval_len_s": 10, "gap_len_s": 40, "jnr_start_db": 10, "jnr_step_db": 10},
  "detect": {"calibration_window": [0, 40]}
})";

fs::path write_config(const fs::path& dir, const std::string& text) {
  std::ofstream(dir / "cfg.json") << text;
  return dir / "cfg.json";
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("window and output directory helpers") {
  CHECK(parse_window("0:60") == std::pair{0.0, 60.0});
  CHECK(parse_window("12.5:40") == std::pair{12.5, 40.0});
  CHECK_THROWS_AS(parse_window("60:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_window("a:b"), InvalidArgument);
  CHECK_THROWS_AS(parse_window("10"), InvalidArgument);

  CHECK(resolve_out_dir(fs::path("x"), "fallback") == "x");
  ::setenv(kOutDirEnv, "from_env", 1);
  CHECK(resolve_out_dir(std::nullopt, "fallback") == "from_env");
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir(std::nullopt, "fallback") == "fallback");
}

TEST_CASE("config hash tracks the resolved scenario") {
  auto s = default_scenario();
  const auto h = config_hash(s);
  CHECK(h.size() == 64);
  CHECK(config_hash(default_scenario()) == h);
  s.seed = 9;
  CHECK(config_hash(s) != h);
}

TEST_CASE("simulate, calibrate, detect, evaluate") {
  const auto dir = testing::scratch("pipeline");
  const auto cfg = write_config(dir, kShort);
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, true, dir / "sim"});
  CHECK(sim.epochs == 160);
  REQUIRE(sim.binary_log);
  CHECK(load_observables(sim.log) == load_observables(*sim.binary_log));

  const auto cal = cmd_calibrate({sim.log, std::nullopt, cfg, dir / "cal.json"});
  CHECK(cal.epochs_used == 40);
  CHECK(cal.warnings.empty());
  CHECK(read_calibration(dir / "cal.json") == cal);

  const auto det = cmd_detect({*sim.binary_log, dir / "cal.json", dir / "verdicts.jsonl", 1});
  CHECK(det.verdicts.size() == 160);
  CHECK(det.warnings.empty());
  CHECK(parse_verdict_log(dir / "verdicts.jsonl") == det.verdicts);

  const auto ev = cmd_evaluate({dir / "verdicts.jsonl", sim.truth, 0.0, dir / "eval"});
  CHECK(ev.agc.intervals_detected == 3);
  CHECK(ev.agc.confusion.fp == 0);
  CHECK(fs::exists(dir / "eval" / "report.txt"));
  CHECK(slurp(dir / "eval" / "comparison.txt") == ev.table.render());
}

TEST_CASE("nominal-only log raises no flags") {
  const auto dir = testing::scratch("nominal");
  const auto cfg = write_config(dir, R"({"duration_s": 120,
    "schedule": {"intervals": [{"start_s": 119, "end_s": 120, "jnr_db": -30}]}})");
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, false, dir});
  cmd_calibrate({sim.log, std::pair{0.0, 60.0}, cfg, dir / "cal.json"});
  const auto det = cmd_detect({sim.log, dir / "cal.json", dir / "v.jsonl", 1});
  for (const auto& v : det.verdicts) {
    REQUIRE(v.agc_flag == false);
    REQUIRE(v.cno_flag == false);
  }
}

TEST_CASE("contaminated window warns but succeeds") {
  const auto dir = testing::scratch("contaminated");
  const auto cfg = write_config(dir, kShort);
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, false, dir});
  const auto cal = cmd_calibrate({sim.log, std::pair{20.0, 100.0}, cfg, dir / "cal.json"});
  REQUIRE_FALSE(cal.warnings.empty());
  CHECK(cal.warnings.front().find("contaminated") != std::string::npos);
  CHECK_THROWS_AS(cmd_calibrate({sim.log, std::pair{500.0, 600.0}, cfg, dir / "x.json"}), InsufficientCalibration);
  CHECK_THROWS_AS(cmd_calibrate({sim.log, std::nullopt, std::nullopt, dir / "x.json"}), InvalidArgument);
}

TEST_CASE("lost satellites in the strongest interval are flagged") {
  const auto dir = testing::scratch("lost");
  const auto cfg = write_config(dir, kShort);
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, false, dir});
  cmd_calibrate({sim.log, std::nullopt, cfg, dir / "cal.json"});
  const auto det = cmd_detect({sim.log, dir / "cal.json", dir / "v.jsonl", 1});
  const auto epochs = load_observables(sim.log);
  // Third interval [140, 150) at 30 dB JNR.
  bool saw_missing = false;
  for (std::size_t k = 140; k < 150; ++k) {
    saw_missing = saw_missing || epochs[k].cno_dbhz.empty();
    CHECK(det.verdicts[k].cno_flag == true);
  }
  CHECK(saw_missing);
}

TEST_CASE("calibrated satellites missing from the log produce a warning") {
  const auto dir = testing::scratch("mismatch");
  const auto cfg = write_config(dir, kShort);
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, false, dir});
  auto cal = cmd_calibrate({sim.log, std::nullopt, cfg, dir / "cal.json"});
  cal.cno->per_sat_ref[99] = 40.0;
  write_calibration(cal, dir / "cal.json");
  const auto det = cmd_detect({sim.log, dir / "cal.json", dir / "v.jsonl", 1});
  REQUIRE(det.warnings.size() == 1);
  CHECK(det.warnings[0].find("99") != std::string::npos);
}

TEST_CASE("plot series export is idempotent") {
  const auto dir = testing::scratch("series");
  const auto cfg = write_config(dir, kShort);
  const auto sim = cmd_simulate({cfg, std::nullopt, false, std::nullopt, false, dir});
  cmd_calibrate({sim.log, std::nullopt, cfg, dir / "cal.json"});
  cmd_detect({sim.log, dir / "cal.json", dir / "v.jsonl", 1});

  cmd_export_plot({sim.log, dir / "v.jsonl", std::nullopt, dir / "a"});
  cmd_export_plot({std::nullopt, std::nullopt, dir / "a", dir / "b"});
  for (const char* f : {"agc.tsv", "cno.tsv", "flags.tsv"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }

  std::ofstream(dir / "empty.obs.jsonl").flush();
  cmd_export_plot({dir / "empty.obs.jsonl", std::nullopt, std::nullopt, dir / "e"});
  CHECK(slurp(dir / "e" / "agc.tsv") == "t\tagc_db\n");
  CHECK_THROWS_AS(cmd_export_plot({std::nullopt, std::nullopt, std::nullopt, dir / "z"}), InvalidArgument);
}

TEST_CASE("verdict log format") {
  std::vector<DetectorVerdict> v(2);
  v[0].t = 0.0;
  v[0].agc_flag = true;
  v[0].agc_db = 30.5;
  v[0].agc_threshold = 38.0;
  v[1].t = 1.0;
  v[1].cno_flag = false;
  v[1].cno_present = 8;
  v[1].cno_quorum = 4;
  std::ostringstream out;
  write_verdict_log(v, out);
  std::istringstream in(out.str());
  CHECK(parse_verdict_log(in) == v);
  CHECK(out.str().substr(0, out.str().find('\n')) ==
        R"({"t":0.0,"agc_flag":true,"cno_flag":null,"agc_db":30.5,"agc_threshold":38.0,"cno_dropping":0,"cno_present":0,"cno_quorum":0})");
}

}
