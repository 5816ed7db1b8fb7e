#include <algorithm>
#include <array>
#include <cmath>

#include "airground/feasibility.h"

namespace airground {

namespace {

constexpr double kEps = 1e-9;

struct CaseOutcome {
  bool applicable = false;  // false: no eligible trip / vehicle busy
  bool feasible = false;
  Infeasibility reason = Infeasibility::Busy;
  GvPlan plan;
  double cost = 0.0;
};

// Upcoming trip usable for OD-pair or Halfway delivery: announced within the
// notice window and still reachable from the current position in time.
bool trip_usable(const GvState& gv, const Trip& trip, double t0,
                 const FeasibilityConfig& cfg) {
  if (trip.start - cfg.gv.trip_notice > t0 + kEps) return false;
  return t0 + manhattan_distance(gv.location, trip.origin) / gv.speed <=
         trip.start + kEps;
}

CaseOutcome ride_along(const GvState& gv, const Parcel& p, double t0,
                       const FeasibilityConfig& cfg, GvMode mode) {
  CaseOutcome out;
  if (gv.trips.empty() || !trip_usable(gv, gv.trips.front(), t0, cfg)) {
    return out;
  }
  out.applicable = true;
  const Trip& trip = gv.trips.front();
  const double v = gv.speed;
  const double svc = cfg.service_time;

  const double to_pick = manhattan_distance(gv.location, p.pickup);
  const double pick_to_origin = manhattan_distance(p.pickup, trip.origin);
  const double pick_detour =
      to_pick + pick_to_origin - manhattan_distance(gv.location, trip.origin);
  const double t_pick = t0 + to_pick / v;
  const double start = std::max(trip.start, t_pick + svc + pick_to_origin / v);
  const double duration = trip.end - trip.start;

  GvPlan& plan = out.plan;
  plan.parcel = p.id;
  plan.mode = mode;
  plan.pickup_time = t_pick;
  plan.original_trip = trip;

  double free_at = 0.0;
  Trip delayed = trip;
  delayed.start = start;
  if (mode == GvMode::OdPair) {
    const double tail = manhattan_distance(trip.destination, p.dropoff);
    plan.detour = pick_detour + tail;
    plan.drop_detour = 0.0;
    delayed.end = start + duration;
    plan.dropoff_time = delayed.end + tail / v;
    free_at = plan.dropoff_time + svc;
    plan.stops = {{t_pick, p.pickup, GvStopKind::Pickup},
                  {start, trip.origin, GvStopKind::TripStart},
                  {delayed.end, trip.destination, GvStopKind::TripEnd},
                  {plan.dropoff_time, p.dropoff, GvStopKind::Dropoff}};
  } else {
    const double first = manhattan_distance(trip.origin, p.dropoff);
    const double second = manhattan_distance(p.dropoff, trip.destination);
    plan.detour = pick_detour;
    plan.drop_detour =
        std::max(0.0, first + second -
                          manhattan_distance(trip.origin, trip.destination));
    const double ride = duration + plan.drop_detour / v;
    const double fraction = first + second > 0.0 ? first / (first + second) : 0.0;
    plan.dropoff_time = start + ride * fraction;
    delayed.end = start + ride + svc;
    free_at = delayed.end;
    plan.stops = {{t_pick, p.pickup, GvStopKind::Pickup},
                  {start, trip.origin, GvStopKind::TripStart},
                  {plan.dropoff_time, p.dropoff, GvStopKind::Dropoff},
                  {delayed.end, trip.destination, GvStopKind::TripEnd}};
  }
  plan.delayed_trip = delayed;
  plan.drive = to_pick + pick_to_origin +
               (mode == GvMode::OdPair ? manhattan_distance(trip.destination, p.dropoff)
                                       : plan.drop_detour);
  out.cost = gv_cost(mode, plan.detour, plan.drop_detour, plan.drive, cfg);

  if (plan.detour > cfg.gv.d_max + kEps ||
      (mode == GvMode::Halfway && plan.drop_detour > cfg.gv.drop_detour + kEps)) {
    out.reason = Infeasibility::Detour;
  } else if (t_pick - p.t_order > cfg.gv.pickup_window + kEps) {
    out.reason = Infeasibility::PickupWindow;
  } else if (plan.dropoff_time - p.t_order > cfg.deadline + kEps) {
    out.reason = Infeasibility::Deadline;
  } else if (gv.trips.size() > 1 && free_at > gv.trips[1].start + kEps) {
    out.reason = Infeasibility::Busy;
  } else {
    out.feasible = true;
  }
  return out;
}

CaseOutcome unoccupied(const GvState& gv, const Parcel& p, double t0,
                       const FeasibilityConfig& cfg) {
  CaseOutcome out;
  out.applicable = true;
  const double v = gv.speed;
  const double svc = cfg.service_time;
  const double to_pick = manhattan_distance(gv.location, p.pickup);
  const double carry = manhattan_distance(p.pickup, p.dropoff);

  GvPlan& plan = out.plan;
  plan.parcel = p.id;
  plan.mode = GvMode::Unoccupied;
  plan.pickup_time = t0 + to_pick / v;
  plan.dropoff_time = plan.pickup_time + svc + carry / v;
  plan.drive = to_pick + carry;
  plan.detour = plan.drive;
  plan.stops = {{plan.pickup_time, p.pickup, GvStopKind::Pickup},
                {plan.dropoff_time, p.dropoff, GvStopKind::Dropoff}};
  out.cost = gv_cost(GvMode::Unoccupied, 0.0, 0.0, plan.drive, cfg);

  const double free_at = plan.dropoff_time + svc;
  if (plan.dropoff_time - p.t_order > cfg.deadline + kEps) {
    out.reason = Infeasibility::Deadline;
  } else if (!gv.trips.empty() &&
             free_at + manhattan_distance(p.dropoff, gv.trips.front().origin) / v >
                 gv.trips.front().start + kEps) {
    out.reason = Infeasibility::Busy;
  } else {
    out.feasible = true;
  }
  return out;
}

}  // namespace

PlanResult plan_gv_delivery(const GvState& gv, const Parcel& p, double now,
                            const FeasibilityConfig& cfg) {
  if (gv.occupied || gv.active_delivery) {
    return Infeasible{Infeasibility::Busy};
  }
  const double t0 = std::max(now, gv.available_from);
  // Every case drives position -> pick-up -> drop-off at least.
  const double lower = t0 +
                       (manhattan_distance(gv.location, p.pickup) +
                        manhattan_distance(p.pickup, p.dropoff)) / gv.speed +
                       cfg.service_time;
  if (lower - p.t_order > cfg.deadline + kEps) {
    return Infeasible{Infeasibility::Deadline};
  }

  const std::array<CaseOutcome, 3> cases = {
      ride_along(gv, p, t0, cfg, GvMode::OdPair),
      ride_along(gv, p, t0, cfg, GvMode::Halfway),
      unoccupied(gv, p, t0, cfg)};

  const CaseOutcome* best = nullptr;
  for (const auto& c : cases) {
    if (c.feasible && (!best || c.cost < best->cost - kEps)) {
      best = &c;
    }
  }
  if (!best) {
    for (const auto& c : cases) {
      if (c.applicable && c.reason != Infeasibility::Busy) {
        return Infeasible{c.reason};
      }
    }
    return Infeasible{Infeasibility::Busy};
  }

  CandidatePlan out;
  out.agent = {AgentKind::Gv, gv.id};
  out.parcel = p.id;
  out.gv_plan = best->plan;
  out.cost = best->cost;
  out.detour = best->plan.detour + best->plan.drop_detour;
  out.pickup_time = best->plan.pickup_time;
  out.dropoff_time = best->plan.dropoff_time;
  out.route_end = best->plan.stops.back().t;
  out.added_time = best->plan.dropoff_time - t0;
  out.anchor_is_position = true;
  return out;
}

}  // namespace airground
