#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "airground/feasibility.h"

namespace airground {

const char* to_string(Violation v) {
  switch (v) {
    case Violation::Energy: return "energy";
    case Violation::Deadline: return "deadline";
    case Violation::Payload: return "payload";
    case Violation::NoRoute: return "no_route";
    case Violation::Detour: return "detour";
    case Violation::PickupWindow: return "pickup_window";
    case Violation::Busy: return "busy";
    case Violation::Precedence: return "precedence";
    case Violation::Anchor: return "anchor";
    case Violation::Station: return "station";
    case Violation::Annotation: return "annotation";
  }
  return "?";
}

bool names_constraint(Violation v, Infeasibility reason) {
  switch (reason) {
    case Infeasibility::Energy: return v == Violation::Energy;
    case Infeasibility::Deadline: return v == Violation::Deadline;
    case Infeasibility::NoRoute: return v == Violation::NoRoute;
    case Infeasibility::Payload: return v == Violation::Payload;
    case Infeasibility::Detour: return v == Violation::Detour;
    case Infeasibility::PickupWindow: return v == Violation::PickupWindow;
    case Infeasibility::Busy: return v == Violation::Busy;
  }
  return false;
}

namespace {

constexpr double kSlack = 1e-9;

class ViolationSet {
 public:
  void add(Violation v) { set_.insert(v); }
  std::vector<Violation> list() const { return {set_.begin(), set_.end()}; }

 private:
  std::set<Violation> set_;
};

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

struct RouteSpec {
  Location location;      // expected position of the route start
  double start_time = 0;  // expected anchor time
  double start_load = 0;
  double start_energy = 0;
  std::vector<Waypoint> kept;  // waypoints that must survive in order
};

// The old route (minus its anchor, which is compared separately) must survive
// unchanged and in order once the inserted parcel's stops are removed.
void check_order(const RoutePlan& route, const std::vector<Waypoint>& kept,
                 const std::optional<Job>& extra, ViolationSet& out) {
  std::vector<const Waypoint*> rest;
  for (std::size_t k = 1; k < route.waypoints.size(); ++k) {
    const auto& w = route.waypoints[k];
    const bool is_extra = extra && w.parcels.size() == 1 &&
                          w.parcels.front() == extra->parcel;
    if (!is_extra) rest.push_back(&w);
  }
  if (rest.size() != kept.size()) {
    out.add(Violation::Precedence);
    return;
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (!(rest[k]->l == kept[k].l) || rest[k]->mu != kept[k].mu ||
        rest[k]->parcels != kept[k].parcels) {
      out.add(Violation::Precedence);
      return;
    }
  }
}

template <class DistFn>
void walk_route(const RoutePlan& route, const std::map<int, Job>& jobs,
                const RouteSpec& spec, double speed, double service,
                double deadline, DistFn dist, bool count_mode, int count_cap,
                const EnergyModelParams* energy, bool free_empty,
                double reserve, CheckOptions opts, ViolationSet& out) {
  const auto& wps = route.waypoints;
  if (wps.empty()) {
    out.add(Violation::Anchor);
    return;
  }
  if (!(wps[0].l == spec.location) ||
      !close(wps[0].t, spec.start_time, opts.tolerance)) {
    out.add(Violation::Anchor);
  }

  // Structure: each job is dropped once; a pick-up, when present, precedes it.
  std::map<int, int> picks, drops;
  std::map<int, std::size_t> pick_at, drop_at;
  for (std::size_t k = 0; k < wps.size(); ++k) {
    for (int id : wps[k].parcels) {
      if (!jobs.count(id)) {
        out.add(Violation::Precedence);
        continue;
      }
      if (k == 0) continue;  // anchor's own operation is already under way
      if (wps[k].mu == 1) {
        ++picks[id];
        pick_at[id] = k;
      } else if (wps[k].mu == -1) {
        ++drops[id];
        drop_at[id] = k;
      } else {
        out.add(Violation::Precedence);
      }
    }
  }
  for (const auto& [id, job] : jobs) {
    const bool anchor_drop = std::find(wps[0].parcels.begin(), wps[0].parcels.end(), id) !=
                                 wps[0].parcels.end() && wps[0].mu == -1;
    if (anchor_drop) continue;
    if (drops[id] != 1 || picks[id] > 1 ||
        (picks[id] == 1 && pick_at[id] > drop_at[id])) {
      out.add(Violation::Precedence);
    }
  }

  double load = spec.start_load;
  double e = spec.start_energy;
  double t = spec.start_time;
  double depart = t + (wps[0].mu != 0 ? service : 0.0);
  if (opts.verify_annotations) {
    if (!close(wps[0].payload_after, load, opts.tolerance)) out.add(Violation::Annotation);
    if (energy && (!wps[0].energy_after || !close(*wps[0].energy_after, e, opts.tolerance))) {
      out.add(Violation::Annotation);
    }
  }
  for (std::size_t k = 1; k < wps.size(); ++k) {
    double d = 0.0;
    try {
      d = dist(wps[k - 1].l, wps[k].l);
    } catch (const NoRouteError&) {
      out.add(Violation::NoRoute);
      return;
    }
    const double leg_time = d / speed;
    if (energy) {
      const double rate = (free_empty && load <= kSlack)
                              ? 0.0
                              : energy->slope * load + energy->intercept;
      e -= rate * leg_time;
      if (e < -kSlack) out.add(Violation::Energy);
    }
    t = depart + leg_time;
    for (int id : wps[k].parcels) {
      auto it = jobs.find(id);
      if (it == jobs.end()) continue;
      const double amount = count_mode ? 1.0 : it->second.weight;
      load += wps[k].mu * amount;
      if (wps[k].mu == -1 && t - it->second.t_order > deadline + kSlack) {
        out.add(Violation::Deadline);
      }
    }
    if (count_mode && load > count_cap + kSlack) out.add(Violation::Payload);
    if (load < -kSlack) out.add(Violation::Precedence);
    if (opts.verify_annotations) {
      if (!close(wps[k].t, t, opts.tolerance) ||
          !close(wps[k].payload_after, load, opts.tolerance)) {
        out.add(Violation::Annotation);
      }
      if (energy && (!wps[k].energy_after || !close(*wps[k].energy_after, e, opts.tolerance))) {
        out.add(Violation::Annotation);
      }
    }
    depart = t + (wps[k].mu != 0 ? service : 0.0);
  }
  if (energy && e < reserve - kSlack) out.add(Violation::Energy);
}

}  // namespace

std::vector<Violation> check_uav_route(const UavState& uav,
                                       const std::optional<Job>& extra,
                                       double now, const RoutePlan& route,
                                       const FeasibilityConfig& cfg,
                                       CheckOptions opts) {
  ViolationSet out;
  std::map<int, Job> jobs;
  for (const auto& j : uav.jobs) jobs[j.parcel] = j;
  if (extra) jobs[extra->parcel] = *extra;

  RouteSpec spec;
  if (uav.route.empty()) {
    spec.location = uav.location;
    spec.start_time = std::max(now, uav.available_from);
    spec.start_load = uav.payload;
    spec.start_energy = uav.e_remaining;
  } else {
    const auto& head = uav.route.waypoints.front();
    spec.location = head.l;
    spec.start_time = head.t;
    const bool returning = uav.route.waypoints.size() == 1;
    spec.start_load = returning ? 0.0 : head.payload_after;
    spec.start_energy = returning ? uav.e_max : head.energy_after.value_or(uav.e_remaining);
    spec.kept.assign(uav.route.waypoints.begin() + 1, uav.route.waypoints.end());
    if (returning) spec.kept.clear();
  }
  if (!route.waypoints.empty()) {
    std::vector<Waypoint> kept = spec.kept;
    // The station return is re-appended by any replanning; compare the body.
    if (!kept.empty() && kept.back().mu == 0) kept.pop_back();
    RoutePlan body = route;
    if (!body.waypoints.empty() && body.waypoints.back().mu == 0 && body.waypoints.size() > 1) {
      body.waypoints.pop_back();
    }
    check_order(body, kept, extra, out);
    const auto& last = route.waypoints.back();
    if (route.waypoints.size() < 2 || last.mu != 0 || !(last.l == uav.station_location)) {
      out.add(Violation::Station);
    }
  }
  auto dist = [&](Location a, Location b) { return cfg.flight(a, b); };
  walk_route(route, jobs, spec, uav.speed, cfg.service_time, cfg.deadline, dist,
             false, 0, &cfg.energy, cfg.free_empty_legs, uav.alpha * uav.e_max,
             opts, out);
  return out.list();
}

std::vector<Violation> check_courier_route(const CourierState& courier,
                                           const std::optional<Job>& extra,
                                           double now, const RoutePlan& route,
                                           const FeasibilityConfig& cfg,
                                           CheckOptions opts) {
  ViolationSet out;
  std::map<int, Job> jobs;
  for (const auto& j : courier.jobs) jobs[j.parcel] = j;
  if (extra) jobs[extra->parcel] = *extra;

  RouteSpec spec;
  if (courier.route.empty()) {
    spec.location = courier.location;
    spec.start_time = std::max(now, courier.available_from);
    spec.start_load = courier.payload;
  } else {
    const auto& head = courier.route.waypoints.front();
    spec.location = head.l;
    spec.start_time = head.t;
    spec.start_load = head.payload_after;
    spec.kept.assign(courier.route.waypoints.begin() + 1, courier.route.waypoints.end());
  }
  check_order(route, spec.kept, extra, out);
  auto dist = [](Location a, Location b) { return manhattan_distance(a, b); };
  walk_route(route, jobs, spec, courier.speed, cfg.service_time, cfg.deadline,
             dist, true, courier.n_max, nullptr, false, 0.0, opts, out);
  return out.list();
}

std::vector<Violation> check_gv_case(const GvState& gv, const Parcel& p,
                                     double now, GvMode mode,
                                     const FeasibilityConfig& cfg,
                                     GvPlan* plan) {
  ViolationSet out;
  if (gv.occupied || gv.active_delivery) {
    out.add(Violation::Busy);
    return out.list();
  }
  const double v = gv.speed;
  const double svc = cfg.service_time;
  const double ready = std::max(now, gv.available_from);
  const Location here = gv.location;
  GvPlan derived;
  derived.parcel = p.id;
  derived.mode = mode;

  const Trip* next = gv.trips.empty() ? nullptr : &gv.trips.front();
  const Trip* after = gv.trips.size() > 1 ? &gv.trips[1] : nullptr;

  if (mode == GvMode::Unoccupied) {
    const double a_leg = manhattan_distance(here, p.pickup);
    const double b_leg = manhattan_distance(p.pickup, p.dropoff);
    derived.pickup_time = ready + a_leg / v;
    derived.dropoff_time = ready + (a_leg + b_leg) / v + svc;
    derived.drive = a_leg + b_leg;
    derived.detour = derived.drive;
    derived.stops = {{derived.pickup_time, p.pickup, GvStopKind::Pickup},
                     {derived.dropoff_time, p.dropoff, GvStopKind::Dropoff}};
    if (derived.dropoff_time > p.t_order + cfg.deadline + kSlack) out.add(Violation::Deadline);
    if (next) {
      const double reposition = manhattan_distance(p.dropoff, next->origin) / v;
      if (derived.dropoff_time + svc + reposition > next->start + kSlack) out.add(Violation::Busy);
    }
    if (plan) *plan = derived;
    return out.list();
  }

  // Ride-along cases need an announced, reachable upcoming trip.
  if (!next || next->start > ready + cfg.gv.trip_notice + kSlack ||
      ready + manhattan_distance(here, next->origin) / v > next->start + kSlack) {
    out.add(Violation::Busy);
    return out.list();
  }
  const Trip& trip = *next;
  const double base = manhattan_distance(here, trip.origin);
  const double via = manhattan_distance(here, p.pickup) + manhattan_distance(p.pickup, trip.origin);
  const double pick_extra = via - base;
  derived.pickup_time = ready + manhattan_distance(here, p.pickup) / v;
  const double arrive_origin = derived.pickup_time + svc + manhattan_distance(p.pickup, trip.origin) / v;
  const double start = arrive_origin > trip.start ? arrive_origin : trip.start;
  Trip delayed = trip;
  delayed.start = start;
  double released = 0.0;
  if (mode == GvMode::OdPair) {
    const double tail = manhattan_distance(trip.destination, p.dropoff);
    derived.detour = pick_extra + tail;
    derived.drop_detour = 0.0;
    delayed.end = start + (trip.end - trip.start);
    derived.dropoff_time = delayed.end + tail / v;
    released = derived.dropoff_time + svc;
    derived.drive = via + tail;
    derived.stops = {{derived.pickup_time, p.pickup, GvStopKind::Pickup},
                     {start, trip.origin, GvStopKind::TripStart},
                     {delayed.end, trip.destination, GvStopKind::TripEnd},
                     {derived.dropoff_time, p.dropoff, GvStopKind::Dropoff}};
  } else {
    const double leg_in = manhattan_distance(trip.origin, p.dropoff);
    const double leg_out = manhattan_distance(p.dropoff, trip.destination);
    const double direct = manhattan_distance(trip.origin, trip.destination);
    derived.detour = pick_extra;
    derived.drop_detour = leg_in + leg_out - direct;
    const double ride = (trip.end - trip.start) + derived.drop_detour / v;
    derived.dropoff_time =
        start + (leg_in + leg_out > 0.0 ? ride * leg_in / (leg_in + leg_out) : 0.0);
    delayed.end = start + ride + svc;
    released = delayed.end;
    derived.drive = via + derived.drop_detour;
    derived.stops = {{derived.pickup_time, p.pickup, GvStopKind::Pickup},
                     {start, trip.origin, GvStopKind::TripStart},
                     {derived.dropoff_time, p.dropoff, GvStopKind::Dropoff},
                     {delayed.end, trip.destination, GvStopKind::TripEnd}};
    if (derived.drop_detour > cfg.gv.drop_detour + kSlack) out.add(Violation::Detour);
  }
  derived.original_trip = trip;
  derived.delayed_trip = delayed;
  if (derived.detour > cfg.gv.d_max + kSlack) out.add(Violation::Detour);
  if (derived.pickup_time > p.t_order + cfg.gv.pickup_window + kSlack) {
    out.add(Violation::PickupWindow);
  }
  if (derived.dropoff_time > p.t_order + cfg.deadline + kSlack) out.add(Violation::Deadline);
  if (after && released > after->start + kSlack) out.add(Violation::Busy);
  if (plan) *plan = derived;
  return out.list();
}

std::vector<Violation> check_gv_plan(const GvState& gv, const Parcel& p,
                                     double now, const GvPlan& plan,
                                     const FeasibilityConfig& cfg,
                                     CheckOptions opts) {
  GvPlan derived;
  auto found = check_gv_case(gv, p, now, plan.mode, cfg, &derived);
  ViolationSet out;
  for (auto v : found) out.add(v);
  if (derived.stops.empty()) return out.list();  // no trip to ride on
  if (opts.verify_annotations) {
    bool same = plan.parcel == p.id && plan.stops.size() == derived.stops.size() &&
                close(plan.detour, derived.detour, opts.tolerance) &&
                close(plan.drop_detour, derived.drop_detour, opts.tolerance) &&
                close(plan.pickup_time, derived.pickup_time, opts.tolerance) &&
                close(plan.dropoff_time, derived.dropoff_time, opts.tolerance);
    for (std::size_t k = 0; same && k < plan.stops.size(); ++k) {
      same = plan.stops[k].kind == derived.stops[k].kind &&
             plan.stops[k].l == derived.stops[k].l &&
             close(plan.stops[k].t, derived.stops[k].t, opts.tolerance);
    }
    if (!same) out.add(Violation::Annotation);
  }
  return out.list();
}

std::vector<Violation> check_candidate(const UavState& uav, const Parcel& p,
                                       double now, const CandidatePlan& c,
                                       const FeasibilityConfig& cfg) {
  return check_uav_route(uav, job_of(p), now, c.new_route, cfg);
}

std::vector<Violation> check_candidate(const CourierState& courier,
                                       const Parcel& p, double now,
                                       const CandidatePlan& c,
                                       const FeasibilityConfig& cfg) {
  return check_courier_route(courier, job_of(p), now, c.new_route, cfg);
}

std::vector<Violation> check_candidate(const GvState& gv, const Parcel& p,
                                       double now, const CandidatePlan& c,
                                       const FeasibilityConfig& cfg) {
  if (!c.gv_plan) return {Violation::Precedence};
  auto out = check_gv_plan(gv, p, now, *c.gv_plan, cfg);
  const double expected = gv_cost(c.gv_plan->mode, c.gv_plan->detour,
                                  c.gv_plan->drop_detour, c.gv_plan->drive, cfg);
  if (std::abs(expected - c.cost) > 1e-9 * std::max(1.0, expected)) {
    out.push_back(Violation::Annotation);
  }
  return out;
}

}  // namespace airground
