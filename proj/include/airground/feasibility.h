#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "airground/agents.h"
#include "airground/geo.h"

namespace airground {

struct EnergyModelParams {
  double slope = 90.3;       // W per kg
  double intercept = 320.9;  // W
};

struct GvLimits {
  double d_max = 2000.0;          // pick-up detour bound, meters
  double pickup_window = 600.0;   // seconds after ordering
  double drop_detour = 1000.0;    // Halfway drop-off detour bound, meters
  double trip_notice = 900.0;     // how far ahead an upcoming trip is known
};

struct FeasibilityConfig {
  double deadline = 3600.0;      // delivery time limit, seconds
  double service_time = 60.0;    // per pick-up and per drop-off
  EnergyModelParams energy;
  // Charge legs flown with no payload at zero power instead of sigma(0).
  bool free_empty_legs = false;
  double courier_rate = 3.15;    // CNY per km
  double gv_rate = 2.7;          // CNY per km, doubled outside Unoccupied
  GvLimits gv;
  // Null means straight-line flight everywhere.
  std::shared_ptr<const FlightRouter> router;

  double flight(Location a, Location b) const {
    return router ? router->distance(a, b) : euclidean_distance(a, b);
  }
};

enum class Infeasibility : std::uint8_t {
  Energy,
  Deadline,
  NoRoute,
  Payload,
  Detour,
  PickupWindow,
  Busy,
};

const char* to_string(Infeasibility reason);

struct CandidatePlan {
  AgentRef agent;
  int parcel = 0;
  // UAV/courier: full replanned route, anchor at index 0.
  RoutePlan new_route;
  // True when the anchor was synthesised at an idle agent's position and is
  // not a waypoint still to be reached.
  bool anchor_is_position = false;
  std::optional<GvPlan> gv_plan;
  double cost = 0.0;        // CNY (courier, GV) or seconds (UAV)
  double added_time = 0.0;  // t(I') - t(I)
  double detour = 0.0;      // meters of extra travel attributable to p
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  double route_end = 0.0;   // completion time of the replanned route
  double energy_used = 0.0;  // UAV: E_max minus energy on station return
};

struct Infeasible {
  Infeasibility reason = Infeasibility::Deadline;
};

using PlanResult = std::variant<CandidatePlan, Infeasible>;

inline bool is_feasible(const PlanResult& r) {
  return std::holds_alternative<CandidatePlan>(r);
}

class NegativeWeightError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Power draw in watts of a UAV carrying `weight` kg.
double power_rate(double weight, const EnergyModelParams& params);

// Energy of flying `route` leg by leg, each leg charged at the power rate of
// the weight carried when departing its first waypoint. Writes energy_after
// at every waypoint, starting from waypoints[0].energy_after (0 if unset).
double path_energy(RoutePlan& route, double speed,
                   const EnergyModelParams& params,
                   bool free_empty_legs = false,
                   const FlightRouter* router = nullptr);

double courier_cost(Location pickup, Location dropoff,
                    const FeasibilityConfig& cfg);
// d, d' and drive in meters.
double gv_cost(GvMode mode, double detour, double drop_detour, double drive,
               const FeasibilityConfig& cfg);

// Cheapest insertion of p's pick-up and drop-off into the agent's route.
PlanResult plan_uav_insertion(const UavState& uav, const Parcel& p, double now,
                              const FeasibilityConfig& cfg);
PlanResult plan_courier_insertion(const CourierState& courier, const Parcel& p,
                                  double now, const FeasibilityConfig& cfg);
// Cheapest feasible case among OD-pair, Halfway and Unoccupied delivery.
PlanResult plan_gv_delivery(const GvState& gv, const Parcel& p, double now,
                            const FeasibilityConfig& cfg);

// Route start used by the planners: the waypoint currently being approached,
// or the agent's position when idle.
Waypoint uav_anchor(const UavState& uav, double now);
Waypoint courier_anchor(const CourierState& courier, double now);

// ---------------------------------------------------------------------------
// Independent checker. Recomputes every quantity from the raw waypoint
// sequence and the agent snapshot; shares no code with the planners.

enum class Violation : std::uint8_t {
  Energy,
  Deadline,
  Payload,
  NoRoute,
  Detour,
  PickupWindow,
  Busy,
  Precedence,  // pick-up/drop-off structure broken
  Anchor,      // route does not start where the agent is
  Station,     // UAV route does not end at its station
  Annotation,  // stored t/payload/energy disagree with recomputation
};

const char* to_string(Violation v);
bool names_constraint(Violation v, Infeasibility reason);

struct CheckOptions {
  bool verify_annotations = true;
  double tolerance = 1e-6;
};

// `extra` is the parcel being inserted (if any); jobs already on the agent
// come from the snapshot.
std::vector<Violation> check_uav_route(const UavState& uav,
                                       const std::optional<Job>& extra,
                                       double now, const RoutePlan& route,
                                       const FeasibilityConfig& cfg,
                                       CheckOptions opts = {});
std::vector<Violation> check_courier_route(const CourierState& courier,
                                           const std::optional<Job>& extra,
                                           double now, const RoutePlan& route,
                                           const FeasibilityConfig& cfg,
                                           CheckOptions opts = {});

// Re-derives one GV delivery case from first principles and lists every
// limit it breaks. `plan` receives the derived plan when non-null.
std::vector<Violation> check_gv_case(const GvState& gv, const Parcel& p,
                                     double now, GvMode mode,
                                     const FeasibilityConfig& cfg,
                                     GvPlan* plan = nullptr);
// Verifies a concrete plan against the re-derived case.
std::vector<Violation> check_gv_plan(const GvState& gv, const Parcel& p,
                                     double now, const GvPlan& plan,
                                     const FeasibilityConfig& cfg,
                                     CheckOptions opts = {});

// Dispatches to the right checker for a candidate.
std::vector<Violation> check_candidate(const UavState& uav, const Parcel& p,
                                       double now, const CandidatePlan& c,
                                       const FeasibilityConfig& cfg);
std::vector<Violation> check_candidate(const CourierState& courier,
                                       const Parcel& p, double now,
                                       const CandidatePlan& c,
                                       const FeasibilityConfig& cfg);
std::vector<Violation> check_candidate(const GvState& gv, const Parcel& p,
                                       double now, const CandidatePlan& c,
                                       const FeasibilityConfig& cfg);

}  // namespace airground
