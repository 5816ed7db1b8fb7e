#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "airground/dispatch.h"
#include "airground/io.h"

namespace airground {

enum class Policy : std::uint8_t {
  TwoStage,    // preference stage, then greedy assignment of the rest
  CostGreedy,  // minimum-cost candidate per parcel, no preference models
  OnDemand,    // earliest pick-up
  UavTaxi,     // cost-greedy restricted to UAVs and GVs
};

const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);

struct FleetConfig {
  double uav_speed = 16.0;
  double uav_e_max = 770160.0;
  double uav_alpha = 0.1;
  double uav_payload_cap = 2.5;
  double courier_speed = 5.0;
  int courier_n_max = 5;
};

struct SimConfig {
  DispatchParams dispatch;
  FleetConfig fleet;
  double retry_interval = 60.0;
  double drain = 2 * 3600.0;  // run past the horizon end to finish deliveries
  bool verify_commits = true;
  bool record_log = true;
  // Kinds used by CostGreedy (UavTaxi always uses UAVs and GVs).
  KindSet cost_greedy_kinds = KindSet::all();
};

struct Metrics {
  long ordered = 0;
  long delivered = 0;
  long failed = 0;
  long pending = 0;
  long delivered_uav = 0;
  long delivered_courier = 0;
  long delivered_gv = 0;
  std::vector<double> delivery_minutes;  // in delivery order
  double mean_delivery_minutes = 0.0;
  double courier_cost = 0.0;  // CNY
  double gv_cost = 0.0;       // CNY
  double total_cost = 0.0;
  double courier_share = 0.0;  // percent of total_cost
  double gv_share = 0.0;
  double uav_seconds = 0.0;    // added UAV time of all UAV deliveries
  std::optional<double> taxi_price;  // gv_cost / delivered_gv

  bool operator==(const Metrics&) const = default;
};

class CorruptLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExecutionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SimResult {
  Metrics metrics;
  std::vector<std::string> log;
  std::vector<Parcel> parcels;
  Registry registry;
  long dispatch_rounds = 0;
};

// Agents per scenario station: UAV ids run station by station, couriers too.
Registry build_registry(const Scenario& s, const FleetConfig& fleet);

// `models` is required by TwoStage and ignored otherwise. `observer` sees
// every cost-greedy decision.
SimResult run_simulation(const Scenario& scenario, Policy policy, const SimConfig& cfg,
                         const PreferenceModels* models = nullptr, std::uint64_t seed = 0,
                         const DispatchObserver& observer = nullptr);

// Fills the derived fields (mean, totals, shares, taxi price) from the counts.
void finalize_metrics(Metrics& m);

// Recomputes Metrics from a complete event log.
Metrics collect_metrics(const std::vector<std::string>& log);

// Lines are "time<TAB>kind<TAB>entity[<TAB>key=value ...]".
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Training data from simulated cost-greedy dispatch

struct AgentDatasetConfig {
  double label_noise = 0.0;  // probability of flipping each label
  // Fraction of negative samples kept, drawn per candidate; 1 keeps all.
  double negative_keep = 1.0;
  std::size_t max_samples = 0;  // 0: unlimited
  // Drop negatives at random until no more remain than positives. Applied
  // before label noise.
  bool balance_classes = false;
};

// Replays the scenario with only `kind` agents under the cost-greedy
// dispatcher. Every feasible candidate becomes a sample labelled 1 iff it
// was selected, before subsampling and noise.
Dataset simulate_agent_dataset(AgentKind kind, const Scenario& scenario, const SimConfig& cfg,
                               std::uint64_t seed, const AgentDatasetConfig& data = {});

// Courier decisions of such a replay in log form, labels noised.
std::vector<CourierLogRecord> simulate_courier_log(const Scenario& scenario, const SimConfig& cfg,
                                                   std::uint64_t seed,
                                                   const AgentDatasetConfig& data = {});

}  // namespace airground
