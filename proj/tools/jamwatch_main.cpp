#include "jamwatch/cli.hpp"
#include "jamwatch/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace jamwatch;

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings)
    std::cerr << "warning: " << w << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS chirp-jamming simulator and AGC / C/N0 interference detectors"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a jamming scenario and write an observable log");
  std::string sim_config, sim_out, sim_dump;
  std::uint64_t sim_seed = 0;
  bool sim_iq = false, sim_binary = false;
  sim->add_option("--config", sim_config, "Scenario JSON file (defaults when omitted)")->check(CLI::ExistingFile);
  auto* seed_opt = sim->add_option("--seed", sim_seed, "Override the scenario seed");
  sim->add_flag("--iq", sim_iq, "Run the sample-level chain instead of the observable fast path");
  sim->add_option("--dump-iq", sim_dump, "With --iq: dump the front-end input as .iq32");
  sim->add_flag("--binary", sim_binary, "Also write the framed binary log (observables.blk)");
  sim->add_option("--out", sim_out, "Output directory");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Build AGC and C/N0 references from an interference-free window");
  std::string cal_log, cal_window, cal_config, cal_out;
  cal->add_option("--log", cal_log, "Observable log (.obs.jsonl or .blk)")->required()->check(CLI::ExistingFile);
  cal->add_option("--window", cal_window, "Calibration window START:END in seconds");
  cal->add_option("--config", cal_config, "Scenario JSON providing detector parameters")->check(CLI::ExistingFile);
  cal->add_option("--out", cal_out, "Calibration file to write");

  // detect
  auto* det = app.add_subcommand("detect", "Run both detectors over a log");
  std::string det_log, det_cal, det_out;
  int det_debounce = 1;
  det->add_option("--log", det_log, "Observable log (.obs.jsonl or .blk)")->required()->check(CLI::ExistingFile);
  det->add_option("--calibration", det_cal, "Calibration file")->required()->check(CLI::ExistingFile);
  det->add_option("--debounce", det_debounce, "Consecutive detections required per flag")->check(CLI::PositiveNumber);
  det->add_option("--out", det_out, "Verdict log to write");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score verdicts against ground truth");
  std::string eva_verdicts, eva_truth, eva_out;
  double eva_guard = 0.0;
  eva->add_option("--verdicts", eva_verdicts, "Verdict log")->required()->check(CLI::ExistingFile);
  eva->add_option("--truth", eva_truth, "Ground-truth file")->required()->check(CLI::ExistingFile);
  eva->add_option("--guard-band", eva_guard, "Seconds after/before interval edges left unscored")
      ->check(CLI::NonNegativeNumber);
  eva->add_option("--out", eva_out, "Report directory");

  // export-plot
  auto* exp = app.add_subcommand("export-plot", "Write plot-ready TSV series");
  std::string exp_log, exp_verdicts, exp_series, exp_out;
  exp->add_option("--log", exp_log, "Observable log")->check(CLI::ExistingFile);
  exp->add_option("--verdicts", exp_verdicts, "Verdict log")->check(CLI::ExistingFile);
  exp->add_option("--series", exp_series, "Directory of a previous export to re-import")->check(CLI::ExistingDirectory);
  exp->add_option("--out", exp_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      cli::SimulateOptions o;
      if (!sim_config.empty())
        o.config = sim_config;
      if (seed_opt->count())
        o.seed = sim_seed;
      o.iq = sim_iq;
      if (!sim_dump.empty()) {
        if (!sim_iq)
          throw InvalidArgument("--dump-iq requires --iq");
        o.dump_iq = sim_dump;
      }
      o.binary = sim_binary;
      o.out_dir = cli::resolve_out_dir(sim_out.empty() ? std::nullopt : std::optional<fs::path>(sim_out), "run");
      const auto r = cli::cmd_simulate(o);
      std::cout << "wrote " << r.epochs << " epochs to " << r.log.string() << "\n";
    } else if (cal->parsed()) {
      cli::CalibrateOptions o;
      o.log = cal_log;
      if (!cal_window.empty())
        o.window = cli::parse_window(cal_window);
      if (!cal_config.empty())
        o.config = cal_config;
      o.out = cal_out.empty() ? cli::resolve_out_dir(std::nullopt, ".") / "calibration.json" : fs::path(cal_out);
      const auto c = cli::cmd_calibrate(o);
      print_warnings(c.warnings);
      std::cout << "AGC threshold " << c.agc->threshold << " dB, " << c.cno->per_sat_ref.size()
                << " satellites calibrated -> " << o.out.string() << "\n";
    } else if (det->parsed()) {
      cli::DetectOptions o;
      o.log = det_log;
      o.calibration = det_cal;
      o.debounce = det_debounce;
      o.out = det_out.empty() ? cli::resolve_out_dir(std::nullopt, ".") / "verdicts.jsonl" : fs::path(det_out);
      const auto r = cli::cmd_detect(o);
      print_warnings(r.warnings);
      std::cout << "wrote " << r.verdicts.size() << " verdicts to " << o.out.string() << "\n";
    } else if (eva->parsed()) {
      cli::EvaluateOptions o;
      o.verdicts = eva_verdicts;
      o.truth = eva_truth;
      o.guard_band_s = eva_guard;
      o.out_dir = cli::resolve_out_dir(eva_out.empty() ? std::nullopt : std::optional<fs::path>(eva_out), ".");
      const auto r = cli::cmd_evaluate(o);
      std::cout << r.table.render();
    } else if (exp->parsed()) {
      cli::ExportOptions o;
      if (!exp_log.empty())
        o.log = exp_log;
      if (!exp_verdicts.empty())
        o.verdicts = exp_verdicts;
      if (!exp_series.empty())
        o.series = exp_series;
      o.out_dir = cli::resolve_out_dir(exp_out.empty() ? std::nullopt : std::optional<fs::path>(exp_out), "plot");
      cli::cmd_export_plot(o);
      std::cout << "wrote series to " << o.out_dir.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
