#pragma once

// Experiment configuration, execution and on-disk reporting.
//
// Every run writes into one output directory:
//   report.json        machine-readable summary (bit-reproducible)
//   timing.json        wall-clock seconds (not reproducible, kept apart)
//   config.txt         the resolved configuration as key = value lines
//   norms.csv          direct / picard: block and Besov norms per sample
//   contraction.csv    picard: one row per iterate difference
//   uniqueness.csv     uniqueness: difference norms and Osgood envelope
//   calibration.txt    inequalities: calibrated constants
//   histograms.csv     inequalities: ratio histograms per check and phase
//   checkpoints/       binary field checkpoints at the configured cadence

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcm/data.hpp"
#include "tcm/keyvalue.hpp"
#include "tcm/model.hpp"

namespace tcm::exp {

enum class Mode { Direct, Picard, Uniqueness, Inequalities };
Mode parse_mode(const std::string& name);
std::string to_string(Mode m);

/// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  Mode mode = Mode::Direct;
  int d = 2;
  int n = 32;
  model::ModelParams params;
  data::DataSpec data;
  double dt = 1e-3;
  double T = 0.1;
  std::filesystem::path out = "tcm_out";
  int checkpoint_every = 0;  // steps between checkpoints, 0 disables

  // picard
  double delta = 0.5;
  int n_max = 40;
  double contraction_tol = 1e-8;

  // uniqueness
  std::vector<double> epsilons{0.0, 1e-8, 1e-6};
  double T1 = 0.05;
  std::uint64_t perturbation_seed = 7;
  double smallness_constant = 1.0;
  double envelope_constant = 1.0;

  // inequalities
  int trials = 200;
  int calibration_n = 16;
  int assert_n = 32;
  double margin = 1.5;
  std::uint64_t suite_seed = 2024;
  int histogram_bins = 20;

  /// Unknown keys and unparsable values raise ConfigError; validate() is called.
  static ExperimentConfig from_keyvalue(const kv::KeyValue& kv);
  kv::KeyValue to_keyvalue() const;
  /// Throws ConfigError for the first violated invariant.
  void validate() const;
};

/// Every key accepted by from_keyvalue.
const std::vector<std::string>& config_keys();

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 1,
  kBudgetViolation = 2,
  kBlowUp = 3,
  kNonContraction = 4,
};

struct RunReport {
  std::string mode;
  std::string status = "success";
  int exit_code = kSuccess;
  std::string message;
  std::vector<std::string> files;  // relative to the output directory
  std::optional<bool> budget_pass;
  bool blow_up = false;
  std::optional<double> blow_up_time;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
  nlohmann::json details = nlohmann::json::object();  // mode-specific tables

  nlohmann::json to_json() const;  // without wall_seconds
  static RunReport from_json(const nlohmann::json& j);
};

using Logger = std::function<void(const std::string&)>;

/// Runs the experiment and writes its outputs. Configuration problems raise
/// ConfigError; numerical outcomes are reported through exit_code.
RunReport run(const ExperimentConfig& config, const Logger& log = {});

/// Reads report.json and timing.json from a run directory; throws
/// std::runtime_error if a listed file is missing.
RunReport load_report(const std::filesystem::path& dir);
/// Short human-readable summary.
std::string summarize(const RunReport& report);

/// Header of norms.csv for a grid whose top block is j_max.
std::vector<std::string> norms_header(int j_max);

}  // namespace tcm::exp
