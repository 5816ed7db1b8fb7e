#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "airground/experiment.h"
#include "airground/random.h"

namespace airground {

using nlohmann::json;

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::Demand: return "demand";
    case SweepAxis::TaxiRatio: return "taxi_ratio";
    case SweepAxis::UavsPerStation: return "uavs_per_station";
    case SweepAxis::CouriersPerStation: return "couriers_per_station";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::None, SweepAxis::Demand, SweepAxis::TaxiRatio, SweepAxis::UavsPerStation,
                 SweepAxis::CouriersPerStation}) {
    if (s == to_string(a)) return a;
  }
  throw InvalidConfig("unknown sweep axis: " + s);
}

std::vector<double> admissible_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return {};
    case SweepAxis::Demand: return {0.7, 0.8, 0.9, 1.0};
    case SweepAxis::TaxiRatio: return {0.05, 0.1, 0.15, 0.2};
    case SweepAxis::UavsPerStation: return {15, 20, 25, 30};
    case SweepAxis::CouriersPerStation: return {10, 15, 20, 25};
  }
  return {};
}

void ExperimentSpec::validate() const {
  if (policies.empty()) throw InvalidConfig("no policies given");
  if (repetitions < 1) throw InvalidConfig("repetitions must be at least 1");
  if (axis == SweepAxis::None && !values.empty()) throw InvalidConfig("sweep values without an axis");
  if (axis != SweepAxis::None && values.empty()) throw InvalidConfig("sweep axis without values");
  if (!allow_custom_values && axis != SweepAxis::None) {
    const auto ok = admissible_values(axis);
    for (double v : values) {
      if (std::find(ok.begin(), ok.end(), v) == ok.end()) {
        throw InvalidConfig(std::string("value ") + format_number(v) + " is not admissible for " +
                            to_string(axis));
      }
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidConfig("sweep values must be finite");
    const bool ratio = axis == SweepAxis::Demand || axis == SweepAxis::TaxiRatio;
    if (ratio && !(v > 0 && v <= 1)) throw InvalidConfig("ratios must lie in (0, 1]");
    if (!ratio && (v < 1 || v != std::floor(v))) throw InvalidConfig("counts must be positive integers");
  }
  scenario.validate();
  sim.dispatch.thresholds.validate();
}

std::uint64_t repetition_seed(const ExperimentSpec& spec, int k) {
  return spec.seed + static_cast<std::uint64_t>(k);
}

namespace {

json config_json(const ScenarioConfig& c) {
  return {{"demand_ratio", c.demand_ratio},   {"taxi_ratio", c.taxi_ratio},
          {"uavs_per_station", c.uavs_per_station},
          {"couriers_per_station", c.couriers_per_station},
          {"uav_stations", c.uav_stations},   {"courier_stations", c.courier_stations},
          {"base_orders", c.base_orders},     {"fleet_size", c.fleet_size},
          {"area_width", c.area_width},       {"area_height", c.area_height},
          {"delivery_radius", c.delivery_radius}, {"peak_fraction", c.peak_fraction},
          {"peak_sigma", c.peak_sigma},       {"gv_mean_idle", c.gv_mean_idle},
          {"gv_trip_min", c.gv_trip_min},     {"gv_trip_max", c.gv_trip_max},
          {"weight_lo", c.weight_lo},         {"weight_hi", c.weight_hi},
          {"seed", c.seed}};
}

json sim_json(const SimConfig& s) {
  const auto& f = s.dispatch.feasibility;
  return {{"deadline", f.deadline},
          {"service_time", f.service_time},
          {"energy", {f.energy.slope, f.energy.intercept}},
          {"free_empty_legs", f.free_empty_legs},
          {"courier_rate", f.courier_rate},
          {"gv_rate", f.gv_rate},
          {"gv", {f.gv.d_max, f.gv.pickup_window, f.gv.drop_detour, f.gv.trip_notice}},
          {"uav_cost_rate", s.dispatch.uav_cost_rate},
          {"thresholds", {s.dispatch.thresholds.courier, s.dispatch.thresholds.gv,
                          s.dispatch.thresholds.uav}},
          {"fleet", {s.fleet.uav_speed, s.fleet.uav_e_max, s.fleet.uav_alpha,
                     s.fleet.uav_payload_cap, s.fleet.courier_speed, s.fleet.courier_n_max}},
          {"retry_interval", s.retry_interval},
          {"drain", s.drain},
          {"cost_greedy_kinds", {s.cost_greedy_kinds.uav, s.cost_greedy_kinds.courier,
                                 s.cost_greedy_kinds.gv}}};
}

json train_json(const TrainConfig& t) {
  return {t.epochs, t.batch_size, t.learning_rate, t.seed, t.layer_rate_scale};
}

json transfer_json(const TransferConfig& t) {
  return {t.epochs, t.batch_size, t.base_learning_rate, t.transfer_rate_ratio, t.specific_dims, t.seed};
}

json data_json(const AgentDatasetConfig& d) {
  return {d.label_noise, d.negative_keep, d.max_samples, d.balance_classes};
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string pipeline_fingerprint(const PipelineSpec& p) {
  const json doc = {{"scenario_path", p.scenario_path.value_or("")},
                    {"scenario", config_json(p.scenario)},
                    {"courier_log_path", p.courier_log_path.value_or("")},
                    {"sim", sim_json(p.sim)},
                    {"data", {data_json(p.courier_data), data_json(p.gv_data), data_json(p.uav_data)}},
                    {"courier_train", train_json(p.courier_train)},
                    {"gv_transfer", transfer_json(p.gv_transfer)},
                    {"uav_transfer", transfer_json(p.uav_transfer)},
                    {"seed", p.seed}};
  return hex64(fnv1a(doc.dump()));
}

std::string spec_fingerprint(const ExperimentSpec& spec, std::uint64_t seed) {
  json policies = json::array();
  for (auto p : spec.policies) policies.push_back(to_string(p));
  const json doc = {{"scenario_path", spec.scenario_path.value_or("")},
                    {"scenario", config_json(spec.scenario)},
                    {"policies", policies},
                    {"axis", to_string(spec.axis)},
                    {"values", spec.values},
                    {"repetitions", spec.repetitions},
                    {"base_seed", spec.seed},
                    {"sim", sim_json(spec.sim)},
                    {"models_path", spec.models_path.value_or("")},
                    {"pipeline", pipeline_fingerprint(spec.pipeline)},
                    {"seed", seed}};
  return hex64(fnv1a(doc.dump()));
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "ordered",      "delivered",   "failed",      "pending",          "delivered_uav",
      "delivered_courier", "delivered_gv", "mean_delivery_minutes", "courier_cost", "gv_cost",
      "total_cost",   "courier_share", "gv_share",  "uav_seconds",      "taxi_price"};
  return names;
}

std::vector<std::optional<double>> metric_values(const Metrics& m) {
  return {static_cast<double>(m.ordered),
          static_cast<double>(m.delivered),
          static_cast<double>(m.failed),
          static_cast<double>(m.pending),
          static_cast<double>(m.delivered_uav),
          static_cast<double>(m.delivered_courier),
          static_cast<double>(m.delivered_gv),
          m.mean_delivery_minutes,
          m.courier_cost,
          m.gv_cost,
          m.total_cost,
          m.courier_share,
          m.gv_share,
          m.uav_seconds,
          m.taxi_price};
}

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows, const std::string& fingerprint) {
  // Cells keep first-appearance order.
  std::vector<AggregateRow> out;
  std::vector<std::vector<const RunRow*>> members;
  for (const auto& r : rows) {
    std::size_t k = 0;
    while (k < out.size() &&
           !(out[k].policy == r.policy && out[k].axis == r.axis && out[k].value == r.value)) {
      ++k;
    }
    if (k == out.size()) {
      AggregateRow a;
      a.policy = r.policy;
      a.axis = r.axis;
      a.value = r.value;
      a.fingerprint = fingerprint;
      out.push_back(a);
      members.emplace_back();
    }
    members[k].push_back(&r);
  }
  const std::size_t n_metrics = metric_names().size();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].runs = members[k].size();
    out[k].mean.assign(n_metrics, std::nullopt);
    out[k].stddev.assign(n_metrics, std::nullopt);
    std::vector<std::vector<double>> samples(n_metrics);
    for (const RunRow* r : members[k]) {
      const auto v = metric_values(r->metrics);
      for (std::size_t i = 0; i < n_metrics; ++i) {
        if (v[i]) samples[i].push_back(*v[i]);
      }
    }
    for (std::size_t i = 0; i < n_metrics; ++i) {
      const auto& s = samples[i];
      if (s.empty()) continue;
      double sum = 0.0;
      for (double x : s) sum += x;
      const double mean = sum / static_cast<double>(s.size());
      double ss = 0.0;
      for (double x : s) ss += (x - mean) * (x - mean);
      out[k].mean[i] = mean;
      out[k].stddev[i] = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1)) : 0.0;
    }
  }
  return out;
}

namespace {

Scenario subsample_parcels(const Scenario& s, double ratio, std::uint64_t seed) {
  Scenario out = s;
  const auto keep = sample_vehicles(s.parcels.size(), ratio, seed);
  out.parcels.clear();
  for (std::size_t idx : keep) {
    Parcel p = s.parcels[idx];
    p.id = static_cast<int>(out.parcels.size());
    out.parcels.push_back(p);
  }
  return out;
}

Scenario subsample_gvs(const Scenario& s, double ratio, std::uint64_t seed) {
  Scenario out = s;
  const auto keep = sample_vehicles(s.gvs.size(), ratio, seed);
  out.gvs.clear();
  for (std::size_t idx : keep) {
    GvState g = s.gvs[idx];
    g.id = static_cast<int>(out.gvs.size());
    out.gvs.push_back(g);
  }
  return out;
}

Scenario cell_scenario(const ExperimentSpec& spec, const std::optional<Scenario>& loaded, double value,
                       std::uint64_t seed) {
  if (!loaded) {
    ScenarioConfig cfg = spec.scenario;
    cfg.seed = seed;
    switch (spec.axis) {
      case SweepAxis::None: break;
      case SweepAxis::Demand: cfg.demand_ratio = value; break;
      case SweepAxis::TaxiRatio: cfg.taxi_ratio = value; break;
      case SweepAxis::UavsPerStation: cfg.uavs_per_station = static_cast<int>(value); break;
      case SweepAxis::CouriersPerStation: cfg.couriers_per_station = static_cast<int>(value); break;
    }
    return synth_scenario(cfg);
  }
  // A loaded scenario is the full population; ratio axes subsample it per seed.
  switch (spec.axis) {
    case SweepAxis::None: return *loaded;
    case SweepAxis::Demand: return subsample_parcels(*loaded, value, derive_seed(seed, 11));
    case SweepAxis::TaxiRatio: return subsample_gvs(*loaded, value, derive_seed(seed, 12));
    case SweepAxis::UavsPerStation: {
      Scenario s = *loaded;
      s.uavs_per_station = static_cast<int>(value);
      return s;
    }
    case SweepAxis::CouriersPerStation: {
      Scenario s = *loaded;
      s.couriers_per_station = static_cast<int>(value);
      return s;
    }
  }
  return *loaded;
}

void flush_csv(const ExperimentSpec& spec, const ExperimentResult& r) {
  if (spec.output_dir.empty()) return;
  std::filesystem::create_directories(spec.output_dir);
  const auto path = std::filesystem::path(spec.output_dir) / "results.csv";
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    write_results_csv(out, r);
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const PreferenceModels* models) {
  spec.validate();
  std::optional<PreferenceModels> owned;
  const bool needs_models =
      std::find(spec.policies.begin(), spec.policies.end(), Policy::TwoStage) != spec.policies.end();
  if (needs_models && !models) {
    if (spec.models_path) {
      owned = models_of(load_bundle(*spec.models_path));
    } else {
      owned = models_of(pipeline_train(spec.pipeline).bundle);
    }
    models = &*owned;
  }
  std::optional<Scenario> loaded;
  if (spec.scenario_path) loaded = load_scenario(*spec.scenario_path);

  std::vector<double> values = spec.values;
  if (spec.axis == SweepAxis::None) values = {0.0};

  ExperimentResult result;
  for (double value : values) {
    for (int k = 0; k < spec.repetitions; ++k) {
      const std::uint64_t seed = repetition_seed(spec, k);
      const Scenario scenario = cell_scenario(spec, loaded, value, seed);
      for (Policy policy : spec.policies) {
        SimConfig cfg = spec.sim;
        cfg.record_log = false;
        const SimResult sim = run_simulation(scenario, policy, cfg, models, seed);
        result.rows.push_back({policy, spec.axis, value, seed, sim.metrics, spec_fingerprint(spec, seed)});
        flush_csv(spec, result);
      }
    }
  }
  // Rows are produced value-major; present them policy-major as cells.
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const RunRow& a, const RunRow& b) {
    if (a.policy != b.policy) return a.policy < b.policy;
    return a.value < b.value;
  });
  result.aggregates = aggregate(result.rows, spec_fingerprint(spec, 0));
  flush_csv(spec, result);
  if (!spec.output_dir.empty()) {
    std::ofstream out(std::filesystem::path(spec.output_dir) / "results.json");
    write_results_json(out, result);
    if (!out) throw std::runtime_error("failed writing results.json");
  }
  return result;
}

void write_results_csv(std::ostream& out, const ExperimentResult& r) {
  out << "row,policy,axis,value,seed,runs,metric,metric_value,fingerprint\n";
  const auto& names = metric_names();
  for (const auto& row : r.rows) {
    const auto v = metric_values(row.metrics);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << "run," << to_string(row.policy) << ',' << to_string(row.axis) << ','
          << format_number(row.value) << ',' << row.seed << ",1," << names[i] << ','
          << (v[i] ? format_number(*v[i]) : std::string()) << ',' << row.fingerprint << '\n';
    }
  }
  for (const auto& a : r.aggregates) {
    for (const char* stat : {"mean", "std"}) {
      const auto& v = std::string(stat) == "mean" ? a.mean : a.stddev;
      for (std::size_t i = 0; i < names.size(); ++i) {
        out << stat << ',' << to_string(a.policy) << ',' << to_string(a.axis) << ','
            << format_number(a.value) << ",," << a.runs << ',' << names[i] << ','
            << (v[i] ? format_number(*v[i]) : std::string()) << ',' << a.fingerprint << '\n';
      }
    }
  }
}

void write_results_json(std::ostream& out, const ExperimentResult& r) {
  const auto& names = metric_names();
  auto metrics = [&](const std::vector<std::optional<double>>& v) {
    json m = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = v[i] ? json(*v[i]) : json(nullptr);
    return m;
  };
  json runs = json::array();
  for (const auto& row : r.rows) {
    runs.push_back({{"policy", to_string(row.policy)},
                    {"axis", to_string(row.axis)},
                    {"value", row.value},
                    {"seed", row.seed},
                    {"metrics", metrics(metric_values(row.metrics))},
                    {"fingerprint", row.fingerprint}});
  }
  json cells = json::array();
  for (const auto& a : r.aggregates) {
    cells.push_back({{"policy", to_string(a.policy)},
                     {"axis", to_string(a.axis)},
                     {"value", a.value},
                     {"runs", a.runs},
                     {"mean", metrics(a.mean)},
                     {"std", metrics(a.stddev)},
                     {"fingerprint", a.fingerprint}});
  }
  out << json{{"runs", runs}, {"aggregates", cells}}.dump(1) << '\n';
}

}  // namespace airground
