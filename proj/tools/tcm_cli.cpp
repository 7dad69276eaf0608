#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tcm/experiment.hpp"
#include "tcm/kernels.hpp"
#include "tcm/keyvalue.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", a.sets, "override one key, e.g. --set time.dt=5e-4")->take_all();
  cmd->add_option("--out", a.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", a.seed, "data seed (overrides data.seed)");
}

tcm::exp::ExperimentConfig resolve(const RunArgs& a, std::optional<std::string> forced_mode) {
  tcm::kv::KeyValue kv;
  if (!a.config.empty()) kv = tcm::kv::KeyValue::load(a.config);
  for (const auto& s : a.sets) kv.apply_override(s);
  if (!a.out.empty()) kv.set("output.dir", a.out);
  if (a.seed) kv.set("data.seed", std::to_string(*a.seed));
  if (forced_mode) kv.set("mode", *forced_mode);
  return tcm::exp::ExperimentConfig::from_keyvalue(kv);
}

int execute(const RunArgs& a, std::optional<std::string> forced_mode) {
  try {
    const auto cfg = resolve(a, forced_mode);
    auto report = tcm::exp::run(cfg, [](const std::string& line) { std::cerr << line << '\n'; });
    std::cout << tcm::exp::summarize(report);
    return report.exit_code;
  } catch (const tcm::exp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
  }
  return tcm::exp::kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  tcm::kernels::configure_threads_from_env();

  CLI::App app{"Pseudo-spectral solver and Littlewood-Paley toolkit for the fractional tropical climate model"};
  app.require_subcommand(1);

  RunArgs run_args, cal_args;
  auto* run = app.add_subcommand("run", "run an experiment (mode from the configuration)");
  add_run_flags(run, run_args);

  auto* calibrate = app.add_subcommand("calibrate", "calibrate and assert the inequality constants");
  add_run_flags(calibrate, cal_args);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("--out,dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : tcm::exp::kConfigError;
  }

  if (*run) return execute(run_args, std::nullopt);
  if (*calibrate) return execute(cal_args, std::string("inequalities"));
  if (*report) {
    try {
      std::cout << tcm::exp::summarize(tcm::exp::load_report(report_dir));
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "report error: " << e.what() << '\n';
      return tcm::exp::kConfigError;
    }
  }
  return tcm::exp::kConfigError;
}
