#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "airground/io.h"
#include "airground/preference.h"
#include "airground/sim.h"

namespace airground {

// ---------------------------------------------------------------------------
// Model pipeline: courier log -> f_C -> GV fine-tune -> f_B, and f_C plus a
// specific network -> f_U.

struct PipelineSpec {
  // Training scenario; synthesised from `scenario` when no path is given.
  std::optional<std::string> scenario_path;
  ScenarioConfig scenario = default_training_scenario();
  // Recorded courier decisions; replayed from the scenario when absent.
  std::optional<std::string> courier_log_path;
  SimConfig sim;
  // Replays offer one chosen candidate against hundreds of rejected ones;
  // classes are balanced so that rho > 0.5 marks a candidate resembling the
  // chosen ones.
  AgentDatasetConfig courier_data{0.05, 0.05, 0, true};
  AgentDatasetConfig gv_data{0.0, 1.0, 0, true};
  AgentDatasetConfig uav_data{0.0, 0.2, 0, true};
  TrainConfig courier_train{50, 64, 1e-3, 1, {}};
  TransferConfig gv_transfer{50, 64, 1e-3, 0.1, {32, 1}, 1};
  TransferConfig uav_transfer{50, 64, 1e-3, 0.1, {32, 1}, 1};
  std::uint64_t seed = 1;

  static ScenarioConfig default_training_scenario();
};

struct PipelineResult {
  ModelBundle bundle;
  std::size_t courier_samples = 0;
  std::size_t gv_samples = 0;
  std::size_t uav_samples = 0;
  TrainResult courier_fit;
  TrainResult gv_fit;
  TrainResult uav_fit;
};

PipelineResult pipeline_train(const PipelineSpec& spec);
// FNV-1a 64 of the pipeline inputs, stored in the bundle.
std::string pipeline_fingerprint(const PipelineSpec& spec);

PreferenceModels models_of(const ModelBundle& bundle);

// ---------------------------------------------------------------------------
// Experiments

enum class SweepAxis : std::uint8_t { None, Demand, TaxiRatio, UavsPerStation, CouriersPerStation };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);
// Values evaluated for each axis unless overridden.
std::vector<double> admissible_values(SweepAxis axis);

struct ExperimentSpec {
  // Evaluation scenario file; otherwise synthesised per seed from `scenario`.
  std::optional<std::string> scenario_path;
  ScenarioConfig scenario;
  std::vector<Policy> policies = {Policy::TwoStage, Policy::CostGreedy};
  SweepAxis axis = SweepAxis::None;
  std::vector<double> values;  // empty with axis None: one cell per policy
  bool allow_custom_values = false;
  int repetitions = 1;
  std::uint64_t seed = 1;
  SimConfig sim;
  // Model bundle for TwoStage; trained with `pipeline` when absent.
  std::optional<std::string> models_path;
  PipelineSpec pipeline;
  std::string output_dir;  // empty: nothing written

  // Throws InvalidConfig.
  void validate() const;
};

// Seed of repetition k of a spec.
std::uint64_t repetition_seed(const ExperimentSpec& spec, int k);

// FNV-1a 64 over a canonical dump of the ExperimentSpec (output directory excluded)
// and the seed, as 16 hex digits.
std::string spec_fingerprint(const ExperimentSpec& spec, std::uint64_t seed);

struct RunRow {
  Policy policy = Policy::TwoStage;
  SweepAxis axis = SweepAxis::None;
  double value = 0.0;
  std::uint64_t seed = 0;
  Metrics metrics;
  std::string fingerprint;
};

// Scalar metrics reported per row, in column order.
const std::vector<std::string>& metric_names();
// nullopt for an absent taxi price.
std::vector<std::optional<double>> metric_values(const Metrics& m);

struct AggregateRow {
  Policy policy = Policy::TwoStage;
  SweepAxis axis = SweepAxis::None;
  double value = 0.0;
  std::size_t runs = 0;
  // Per metric over the runs where it is present; sample standard deviation,
  // 0 for a single run.
  std::vector<std::optional<double>> mean;
  std::vector<std::optional<double>> stddev;
  std::string fingerprint;  // of the ExperimentSpec with seed 0
};

struct ExperimentResult {
  std::vector<RunRow> rows;
  std::vector<AggregateRow> aggregates;
};

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows, const std::string& fingerprint);

// `models` overrides models_path and pipeline training. When an output
// directory is set, results.csv is rewritten after every completed run and
// results.json is written at the end.
ExperimentResult run_experiment(const ExperimentSpec& spec, const PreferenceModels* models = nullptr);

// Long-format rows: one line per (row, metric).
void write_results_csv(std::ostream& out, const ExperimentResult& r);
void write_results_json(std::ostream& out, const ExperimentResult& r);

}  // namespace airground
