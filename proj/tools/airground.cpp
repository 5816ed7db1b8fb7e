#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <typeinfo>

#include <CLI11.hpp>
#include <json.hpp>

#include "airground/dispatch.h"
#include "airground/experiment.h"
#include "airground/instances.h"
#include "airground/io.h"
#include "airground/random.h"
#include "airground/sim.h"

using namespace airground;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kOutputEnv = "AIRGROUND_OUTPUT_DIR";

void add_scenario_flags(CLI::App* app, ScenarioConfig& c) {
  app->add_option("--demand", c.demand_ratio, "Demand ratio in (0, 1]")->capture_default_str();
  app->add_option("--taxi-ratio", c.taxi_ratio, "Share of GVs taking part")->capture_default_str();
  app->add_option("--uavs-per-station", c.uavs_per_station)->capture_default_str();
  app->add_option("--couriers-per-station", c.couriers_per_station)->capture_default_str();
  app->add_option("--uav-stations", c.uav_stations)->capture_default_str();
  app->add_option("--courier-stations", c.courier_stations)->capture_default_str();
  app->add_option("--base-orders", c.base_orders, "Orders at demand ratio 1")->capture_default_str();
  app->add_option("--fleet-size", c.fleet_size, "Candidate GVs before the taxi ratio")->capture_default_str();
  app->add_option("--area-width", c.area_width)->capture_default_str();
  app->add_option("--area-height", c.area_height)->capture_default_str();
  app->add_option("--delivery-radius", c.delivery_radius)->capture_default_str();
  app->add_option("--peak-fraction", c.peak_fraction)->capture_default_str();
  app->add_option("--peak-sigma", c.peak_sigma, "Seconds")->capture_default_str();
  app->add_option("--gv-mean-idle", c.gv_mean_idle, "Seconds between synthetic trips")->capture_default_str();
  app->add_option("--gv-trip-min", c.gv_trip_min)->capture_default_str();
  app->add_option("--gv-trip-max", c.gv_trip_max)->capture_default_str();
  app->add_option("--weight-lo", c.weight_lo)->capture_default_str();
  app->add_option("--weight-hi", c.weight_hi)->capture_default_str();
  app->add_option("--scenario-seed", c.seed)->capture_default_str();
}

void add_sim_flags(CLI::App* app, SimConfig& s) {
  auto& d = s.dispatch;
  app->add_option("--uav-cost-rate", d.uav_cost_rate, "CNY per UAV second")->capture_default_str();
  app->add_option("--eps-courier", d.thresholds.courier)->capture_default_str();
  app->add_option("--eps-gv", d.thresholds.gv)->capture_default_str();
  app->add_option("--eps-uav", d.thresholds.uav)->capture_default_str();
  app->add_option("--deadline", d.feasibility.deadline)->capture_default_str();
  app->add_option("--service-time", d.feasibility.service_time)->capture_default_str();
  app->add_flag("--free-empty-legs", d.feasibility.free_empty_legs, "Empty UAV legs draw no power");
  app->add_option("--retry-interval", s.retry_interval)->capture_default_str();
  app->add_flag("!--no-verify", s.verify_commits, "Skip the independent checker on commits");
}

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return ".";
}

json metrics_json(const Metrics& m) {
  json j = json::object();
  const auto& names = metric_names();
  const auto values = metric_values(m);
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = values[i] ? json(*values[i]) : json(nullptr);
  return j;
}

Scenario scenario_from(const std::string& path, const ScenarioConfig& cfg) {
  return path.empty() ? synth_scenario(cfg) : load_scenario(path);
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const OutOfBounds*>(&e)) return "OutOfBounds";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const InvalidScenario*>(&e)) return "InvalidScenario";
  if (dynamic_cast<const InvalidConfig*>(&e)) return "InvalidConfig";
  if (dynamic_cast<const CorruptLog*>(&e)) return "CorruptLog";
  if (dynamic_cast<const ExecutionViolation*>(&e)) return "ExecutionViolation";
  if (dynamic_cast<const MalformedRecord*>(&e)) return "MalformedRecord";
  if (dynamic_cast<const InstanceTooLarge*>(&e)) return "InstanceTooLarge";
  if (dynamic_cast<const CLI::Error*>(&e)) return "UsageError";
  return "Error";
}

int fail(const std::exception& e, int code) {
  std::cerr << json{{"error", {{"type", error_type(e)}, {"message", e.what()}}}}.dump() << '\n';
  return code;
}

// --- oracle-check ------------------------------------------------------------

json oracle_check(std::size_t instances, std::uint64_t seed) {
  std::size_t matches = 0;
  std::size_t cost_below_oracle = 0;
  int max_gap = 0;
  double ratio_sum = 0.0;
  double max_cost_gap = 0.0;
  std::vector<int> gap_histogram;
  for (std::size_t k = 0; k < instances; ++k) {
    SmallInstance inst = random_instance(derive_seed(seed, k));
    const OracleResult oracle = brute_force_oracle(inst.parcels, inst.registry, inst.now, inst.params);
    Registry reg = inst.registry;
    const auto greedy = greedy_gapar(pointers(inst.parcels), reg, inst.now, inst.params);
    const int count = static_cast<int>(greedy.size());
    double cost = 0.0;
    for (const auto& d : greedy) cost += d.cost;
    const int gap = oracle.count - count;
    max_gap = std::max(max_gap, gap);
    if (gap >= static_cast<int>(gap_histogram.size())) gap_histogram.resize(gap + 1, 0);
    if (gap >= 0) ++gap_histogram[gap];
    ratio_sum += oracle.count > 0 ? static_cast<double>(count) / oracle.count : 1.0;
    if (gap == 0) {
      ++matches;
      max_cost_gap = std::max(max_cost_gap, cost - oracle.cost);
      if (cost < oracle.cost - 1e-9) ++cost_below_oracle;
    }
  }
  return {{"instances", instances},
          {"seed", seed},
          {"mean_count_ratio", instances ? ratio_sum / instances : 1.0},
          {"max_count_gap", max_gap},
          {"count_gap_histogram", gap_histogram},
          {"count_matches", matches},
          {"max_cost_gap_on_matches", max_cost_gap},
          {"greedy_cheaper_than_oracle", cost_below_oracle}};
}

std::vector<Policy> parse_policies(const std::vector<std::string>& names) {
  std::vector<Policy> out;
  for (const auto& n : names) {
    try {
      out.push_back(policy_from_string(n));
    } catch (const std::invalid_argument& e) {
      throw InvalidConfig(e.what());
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Air-ground instant delivery simulator"};
  app.set_config("--config", "", "Key-value config file supplying any flag");
  app.require_subcommand(1);

  // synth
  ScenarioConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  add_scenario_flags(synth, synth_cfg);
  synth->add_option("--out", synth_out, std::string("Directory (default $") + kOutputEnv + " or .)");

  // train
  PipelineSpec pipe;
  std::string train_scenario, train_log, train_out;
  auto* train_cmd = app.add_subcommand("train", "Train the courier, GV and UAV preference models");
  add_scenario_flags(train_cmd, pipe.scenario);
  add_sim_flags(train_cmd, pipe.sim);
  train_cmd->add_option("--scenario", train_scenario, "scenario.json to train on");
  train_cmd->add_option("--courier-log", train_log, "Recorded courier decisions (CSV)");
  train_cmd->add_option("--epochs", pipe.courier_train.epochs)->capture_default_str();
  train_cmd->add_option("--transfer-epochs", pipe.gv_transfer.epochs)->capture_default_str();
  train_cmd->add_option("--label-noise", pipe.courier_data.label_noise)->capture_default_str();
  train_cmd->add_option("--max-samples", pipe.courier_data.max_samples, "Per dataset, 0 unlimited")
      ->capture_default_str();
  train_cmd->add_option("--seed", pipe.seed)->capture_default_str();
  train_cmd->add_option("--out", train_out, "Directory for models.txt");

  // simulate
  ScenarioConfig sim_scn;
  SimConfig sim_cfg;
  std::string sim_scenario, sim_models, sim_out, sim_policy = "two-stage";
  std::uint64_t sim_seed = 1;
  bool sim_log = false;
  auto* simulate = app.add_subcommand("simulate", "Run one simulated day");
  add_scenario_flags(simulate, sim_scn);
  add_sim_flags(simulate, sim_cfg);
  simulate->add_option("--scenario", sim_scenario, "scenario.json (synthesised when absent)");
  simulate->add_option("--policy", sim_policy, "two-stage, cost-greedy, on-demand or uav-taxi")
      ->capture_default_str();
  simulate->add_option("--models", sim_models, "Model bundle for two-stage");
  simulate->add_option("--seed", sim_seed)->capture_default_str();
  simulate->add_flag("--log", sim_log, "Write events.log next to metrics.json");
  simulate->add_option("--out", sim_out, "Output directory");

  // sweep
  ExperimentSpec exp;
  std::vector<std::string> exp_policies = {"two-stage", "cost-greedy"};
  std::string exp_axis = "none", exp_scenario, exp_models, exp_out;
  auto* sweep = app.add_subcommand("sweep", "Run policies across a parameter sweep");
  add_scenario_flags(sweep, exp.scenario);
  add_sim_flags(sweep, exp.sim);
  sweep->add_option("--scenario", exp_scenario, "scenario.json used for every run");
  sweep->add_option("--policies", exp_policies)->delimiter(',')->capture_default_str();
  sweep->add_option("--axis", exp_axis, "none, demand, taxi_ratio, uavs_per_station, couriers_per_station")
      ->capture_default_str();
  sweep->add_option("--values", exp.values)->delimiter(',');
  sweep->add_flag("--allow-custom-values", exp.allow_custom_values);
  sweep->add_option("--reps", exp.repetitions)->capture_default_str();
  sweep->add_option("--seed", exp.seed)->capture_default_str();
  sweep->add_option("--models", exp_models, "Model bundle; trained first when absent");
  sweep->add_option("--out", exp_out, "Output directory");

  // oracle-check
  std::size_t oc_instances = 200;
  std::uint64_t oc_seed = 1;
  auto* oracle = app.add_subcommand("oracle-check", "Compare greedy assignment with the exhaustive oracle");
  oracle->add_option("--instances", oc_instances)->capture_default_str();
  oracle->add_option("--seed", oc_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    return fail(e, 2);
  }

  try {
    if (*synth) {
      synth_cfg.validate();
      const Scenario s = synth_scenario(synth_cfg);
      const std::string dir = output_dir(synth_out);
      save_scenario(dir, s, synth_cfg);
      std::cout << json{{"scenario", (fs::path(dir) / "scenario.json").string()},
                        {"orders", s.parcels.size()},
                        {"gvs", s.gvs.size()}}
                       .dump()
                << '\n';
    } else if (*train_cmd) {
      if (!train_scenario.empty()) pipe.scenario_path = train_scenario;
      if (!train_log.empty()) pipe.courier_log_path = train_log;
      pipe.uav_transfer.epochs = pipe.gv_transfer.epochs;
      pipe.gv_data.max_samples = pipe.uav_data.max_samples = pipe.courier_data.max_samples;
      pipe.sim.dispatch.thresholds.validate();
      const PipelineResult r = pipeline_train(pipe);
      const std::string dir = output_dir(train_out);
      fs::create_directories(dir);
      const std::string path = (fs::path(dir) / "models.txt").string();
      save_bundle(path, r.bundle);
      auto last = [](const TrainResult& t) {
        return t.epoch_loss.empty() ? json(nullptr) : json(t.epoch_loss.back());
      };
      std::cout << json{{"models", path},
                        {"fingerprint", r.bundle.fingerprint},
                        {"samples", {{"courier", r.courier_samples}, {"gv", r.gv_samples}, {"uav", r.uav_samples}}},
                        {"final_loss", {{"courier", last(r.courier_fit)}, {"gv", last(r.gv_fit)}, {"uav", last(r.uav_fit)}}}}
                       .dump()
                << '\n';
    } else if (*simulate) {
      sim_scn.validate();
      sim_cfg.dispatch.thresholds.validate();
      const Policy policy = parse_policies({sim_policy}).front();
      std::optional<PreferenceModels> models;
      if (policy == Policy::TwoStage) {
        if (sim_models.empty()) throw InvalidConfig("two-stage needs --models (see the train subcommand)");
        models = models_of(load_bundle(sim_models));
      }
      const Scenario s = scenario_from(sim_scenario, sim_scn);
      sim_cfg.record_log = sim_log;
      const auto t0 = std::chrono::steady_clock::now();
      const SimResult r = run_simulation(s, policy, sim_cfg, models ? &*models : nullptr, sim_seed);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const json out = {{"policy", to_string(policy)},
                        {"seed", sim_seed},
                        {"metrics", metrics_json(r.metrics)},
                        {"dispatch_rounds", r.dispatch_rounds},
                        {"wall_seconds", secs}};
      if (!sim_out.empty() || std::getenv(kOutputEnv)) {
        const std::string dir = output_dir(sim_out);
        fs::create_directories(dir);
        std::ofstream(fs::path(dir) / "metrics.json") << out.dump(1) << '\n';
        if (sim_log) {
          std::ofstream log(fs::path(dir) / "events.log");
          for (const auto& line : r.log) log << line << '\n';
        }
      }
      std::cout << out.dump() << '\n';
    } else if (*sweep) {
      exp.policies = parse_policies(exp_policies);
      exp.axis = sweep_axis_from_string(exp_axis);
      if (!exp_scenario.empty()) exp.scenario_path = exp_scenario;
      if (!exp_models.empty()) exp.models_path = exp_models;
      exp.pipeline.sim = exp.sim;
      exp.output_dir = output_dir(exp_out);
      const ExperimentResult r = run_experiment(exp);
      std::cout << json{{"runs", r.rows.size()},
                        {"aggregates", r.aggregates.size()},
                        {"results", (fs::path(exp.output_dir) / "results.csv").string()}}
                       .dump()
                << '\n';
    } else if (*oracle) {
      std::cout << oracle_check(oc_instances, oc_seed).dump() << '\n';
    }
  } catch (const std::exception& e) {
    return fail(e, 1);
  }
  return 0;
}
