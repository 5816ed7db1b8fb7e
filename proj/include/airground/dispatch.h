#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "airground/agents.h"
#include "airground/feasibility.h"
#include "airground/preference.h"

namespace airground {

struct Thresholds {
  double courier = 0.5;
  double gv = 0.5;
  double uav = 0.5;

  double for_kind(AgentKind kind) const;
  // Throws std::invalid_argument unless every threshold lies in (0, 1).
  void validate() const;
};

struct PreferenceModels {
  Mlp courier;
  Mlp gv;
  Mlp uav;

  const Mlp& for_kind(AgentKind kind) const;
};

struct KindSet {
  bool uav = true;
  bool courier = true;
  bool gv = true;

  static KindSet all() { return {}; }
  static KindSet none() { return {false, false, false}; }
  bool contains(AgentKind kind) const;
};

// Current snapshot of every agent. Agent ids equal their index in the
// per-kind vector.
struct Registry {
  std::vector<UavState> uavs;
  std::vector<CourierState> couriers;
  std::vector<GvState> gvs;
  std::map<AgentRef, StatusRecord> status;

  void report(const StatusRecord& record) { status[record.agent] = record; }
  std::size_t agent_count() const { return uavs.size() + couriers.size() + gvs.size(); }
};

struct DispatchParams {
  FeasibilityConfig feasibility;
  double uav_cost_rate = 0.0;  // CNY per second of UAV time
  Thresholds thresholds;
  FeatureContext features;     // bounds; uav_cost_rate is taken from above
  // Re-check every plan with the independent checker before it commits.
  bool verify_commits = false;
};

struct AssignmentDecision {
  int parcel = 0;
  AgentRef agent;
  double cost = 0.0;      // monetized, comparable across kinds
  double raw_cost = 0.0;  // seconds for UAVs, CNY otherwise
  CandidatePlan plan;
};

// Cost used to compare candidates of different kinds.
double monetized_cost(const CandidatePlan& c, double uav_cost_rate);

// Candidate ordering: monetized cost, then kind (UAV before courier before
// GV), then raw cost and added route time within the kind, then agent id.
bool cheaper(const CandidatePlan& a, const CandidatePlan& b, double uav_cost_rate);

PlanResult plan_for(const Registry& reg, AgentRef agent, const Parcel& p,
                    double now, const FeasibilityConfig& cfg);

// Every feasible candidate for p among the allowed kinds, in (kind, id) order.
std::vector<CandidatePlan> feasible_candidates(const Registry& reg, const Parcel& p,
                                               double now, const FeasibilityConfig& cfg,
                                               KindSet kinds = KindSet::all());

// Applies a plan to the agent's snapshot. The synthesised anchor of an idle
// agent is dropped; the route front becomes the first waypoint to reach.
void commit(Registry& reg, const Parcel& p, const CandidatePlan& plan);

// Runs the independent checker on a candidate against the current snapshot.
std::vector<Violation> check_against(const Registry& reg, const Parcel& p,
                                     double now, const CandidatePlan& plan,
                                     const FeasibilityConfig& cfg);

double preference_of(const Registry& reg, const PreferenceModels& models,
                     const Parcel& p, double now, const CandidatePlan& c,
                     const DispatchParams& params);
FeatureVector features_of(const Registry& reg, const Parcel& p, double now,
                          const CandidatePlan& c, const DispatchParams& params);

// Called for every parcel the cost-greedy dispatcher considers, with all
// feasible candidates and the index of the chosen one.
using DispatchObserver =
    std::function<void(const Registry& reg, const Parcel& p, double now,
                       const std::vector<CandidatePlan>& candidates,
                       std::optional<std::size_t> chosen)>;

struct StageResult {
  std::vector<AssignmentDecision> decisions;
  std::vector<int> remaining;  // parcel ids left for the second stage
};

// Parcels are processed in (t_order, id) order; each decision commits before
// the next parcel is considered.
StageResult preference_stage(const std::vector<const Parcel*>& pending, Registry& reg,
                             const PreferenceModels& models, double now,
                             const DispatchParams& params);

std::vector<AssignmentDecision> greedy_gapar(const std::vector<const Parcel*>& parcels,
                                             Registry& reg, double now,
                                             const DispatchParams& params);

std::vector<AssignmentDecision> dispatch_on_demand(const std::vector<const Parcel*>& pending,
                                                   Registry& reg, double now,
                                                   const DispatchParams& params);

std::vector<AssignmentDecision> dispatch_cost_greedy(
    const std::vector<const Parcel*>& pending, Registry& reg, double now,
    const DispatchParams& params, KindSet kinds,
    const DispatchObserver& observer = nullptr);

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  int count = 0;
  double cost = 0.0;
  // Agent per parcel (input order), nullopt when unassigned.
  std::vector<std::optional<AgentRef>> assignment;
};

constexpr std::size_t kOracleMaxParcels = 8;
constexpr std::size_t kOracleMaxAgents = 4;

// Exhaustive optimum: maximum assigned count, then minimum summed monetized
// cost. Every insertion order of each agent's parcel subset is tried, so any
// sequence of feasible commits is covered. Ties go to the lexicographically
// smallest assignment vector, where "unassigned" sorts after every agent.
OracleResult brute_force_oracle(const std::vector<Parcel>& parcels, const Registry& reg,
                                double now, const DispatchParams& params);

}  // namespace airground
