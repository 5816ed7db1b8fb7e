#include <algorithm>
#include <cmath>
#include <limits>

#include "airground/feasibility.h"

namespace airground {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Lightweight view of one stop, so candidate orders can be evaluated without
// materialising waypoint vectors.
struct Stop {
  Location l;
  int mu = 0;
  double dweight = 0.0;
  int dcount = 0;
  double latest = kInf;  // latest admissible arrival
};

struct RouteFrame {
  std::vector<Stop> core;      // anchor first; UAV station return excluded
  std::vector<double> cc;      // core[k] -> core[k+1]
  std::vector<double> cp;      // core[k] <-> pick-up
  std::vector<double> cd;      // core[k] <-> drop-off
  double pd = 0.0;             // pick-up -> drop-off
  double cs = 0.0;             // core.back() -> station
  double ds = 0.0;             // drop-off -> station
  bool has_station = false;
  Stop pickup;
  Stop dropoff;
  Location station;
};

struct AgentModel {
  double speed = 1.0;
  double service = 0.0;
  double t0 = 0.0;          // anchor arrival
  double start_load = 0.0;  // payload after anchor (kg or count)
  int start_count = 0;
  int count_cap = std::numeric_limits<int>::max();
  bool track_energy = false;
  double start_energy = 0.0;
  double reserve = 0.0;
  EnergyModelParams energy;
  bool free_empty_legs = false;
};

struct Evaluation {
  double end_time = 0.0;
  double distance = 0.0;
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  double final_energy = 0.0;
  bool payload_ok = true;
  bool energy_ok = true;
  bool deadline_ok = true;

  bool feasible() const { return payload_ok && energy_ok && deadline_ok; }
};

// Sequence ids: [0, m) core, m pick-up, m+1 drop-off, m+2 station.
double leg(const RouteFrame& f, int a, int b) {
  const int m = static_cast<int>(f.core.size());
  if (a < m && b < m) return f.cc[a];
  if (a < m && b == m) return f.cp[a];
  if (a == m && b < m) return f.cp[b];
  if (a < m && b == m + 1) return f.cd[a];
  if (a == m + 1 && b < m) return f.cd[b];
  if (a == m && b == m + 1) return f.pd;
  if (a < m && b == m + 2) return f.cs;
  return f.ds;  // drop-off -> station
}

const Stop& stop_of(const RouteFrame& f, int id) {
  const int m = static_cast<int>(f.core.size());
  if (id < m) return f.core[id];
  return id == m ? f.pickup : f.dropoff;
}

void build_sequence(const RouteFrame& f, int i, int j, std::vector<int>& seq) {
  const int m = static_cast<int>(f.core.size());
  seq.clear();
  for (int k = 0; k < i; ++k) seq.push_back(k);
  seq.push_back(m);
  for (int k = i; k < j; ++k) seq.push_back(k);
  seq.push_back(m + 1);
  for (int k = j; k < m; ++k) seq.push_back(k);
  if (f.has_station) seq.push_back(m + 2);
}

double rate_for(const AgentModel& a, double load) {
  if (a.free_empty_legs && load <= kEps) return 0.0;
  return a.energy.slope * std::max(load, 0.0) + a.energy.intercept;
}

Evaluation evaluate(const RouteFrame& f, const AgentModel& a,
                    const std::vector<int>& seq) {
  Evaluation ev;
  const int m = static_cast<int>(f.core.size());
  double t = a.t0;
  double dep = t + (f.core[0].mu != 0 ? a.service : 0.0);
  double load = a.start_load;
  int count = a.start_count;
  double energy = a.start_energy;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const double d = leg(f, seq[k - 1], seq[k]);
    ev.distance += d;
    const double dt = d / a.speed;
    if (a.track_energy) {
      energy -= rate_for(a, load) * dt;
    }
    t = dep + dt;
    if (seq[k] == m + 2) {
      dep = t;
      continue;
    }
    const Stop& s = stop_of(f, seq[k]);
    if (t > s.latest + kEps) ev.deadline_ok = false;
    load += s.dweight;
    count += s.dcount;
    if (count > a.count_cap) ev.payload_ok = false;
    if (seq[k] == m) ev.pickup_time = t;
    if (seq[k] == m + 1) ev.dropoff_time = t;
    dep = t + (s.mu != 0 ? a.service : 0.0);
  }
  ev.end_time = t;
  if (a.track_energy) {
    ev.final_energy = energy;
    if (energy < a.reserve - kEps) ev.energy_ok = false;
  }
  return ev;
}

double latest_for(const std::vector<Job>& jobs, const Waypoint& w,
                  double deadline) {
  double latest = kInf;
  if (w.mu != -1) return latest;
  for (int id : w.parcels) {
    for (const auto& job : jobs) {
      if (job.parcel == id) {
        latest = std::min(latest, job.t_order + deadline);
      }
    }
  }
  return latest;
}

Stop stop_from(const Waypoint& w, const std::vector<Job>& jobs,
               double deadline, bool count_weight) {
  Stop s;
  s.l = w.l;
  s.mu = w.mu;
  s.latest = latest_for(jobs, w, deadline);
  for (int id : w.parcels) {
    double weight = 1.0;
    if (count_weight) {
      for (const auto& job : jobs) {
        if (job.parcel == id) weight = job.weight;
      }
    }
    s.dweight += w.mu * weight;
    s.dcount += w.mu;
  }
  return s;
}

struct SearchResult {
  bool found = false;
  int best_i = 0;
  int best_j = 0;
  Evaluation best;
  // Minimum-end-time candidate overall, used to name the blocking limit.
  Evaluation closest;
  bool any = false;
};

SearchResult search(const RouteFrame& f, const AgentModel& a) {
  SearchResult r;
  const int m = static_cast<int>(f.core.size());
  std::vector<int> seq;
  seq.reserve(m + 3);
  for (int i = 1; i <= m; ++i) {
    for (int j = i; j <= m; ++j) {
      build_sequence(f, i, j, seq);
      const Evaluation ev = evaluate(f, a, seq);
      if (!r.any || ev.end_time < r.closest.end_time - kEps) {
        r.closest = ev;
        r.any = true;
      }
      if (ev.feasible() &&
          (!r.found || ev.end_time < r.best.end_time - kEps)) {
        r.found = true;
        r.best = ev;
        r.best_i = i;
        r.best_j = j;
      }
    }
  }
  return r;
}

Waypoint action_waypoint(const Parcel& p, int mu) {
  Waypoint w;
  w.l = mu == 1 ? p.pickup : p.dropoff;
  w.parcels = {p.id};
  w.mu = mu;
  return w;
}

// Materialise the chosen order with fresh timestamps and annotations.
RoutePlan materialise(const RouteFrame& f, const AgentModel& a,
                      const std::vector<Waypoint>& core, const Waypoint& pick,
                      const Waypoint& drop, const Waypoint* station, int i,
                      int j, int origin_station) {
  std::vector<int> seq;
  build_sequence(f, i, j, seq);
  const int m = static_cast<int>(f.core.size());
  RoutePlan out;
  out.origin_station = origin_station;
  out.waypoints.reserve(seq.size());
  double t = a.t0;
  double dep = t + (f.core[0].mu != 0 ? a.service : 0.0);
  double load = a.start_load;
  double energy = a.start_energy;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const int id = seq[k];
    Waypoint w = id < m ? core[id] : (id == m ? pick : (id == m + 1 ? drop : *station));
    if (k == 0) {
      w.t = a.t0;
      w.payload_after = load;
      if (a.track_energy) w.energy_after = energy;
      out.waypoints.push_back(std::move(w));
      continue;
    }
    const double d = leg(f, seq[k - 1], id);
    const double dt = d / a.speed;
    if (a.track_energy) energy -= rate_for(a, load) * dt;
    t = dep + dt;
    w.t = t;
    if (id != m + 2) load += stop_of(f, id).dweight;
    w.payload_after = std::abs(load) < kEps ? 0.0 : load;
    if (a.track_energy) w.energy_after = energy;
    dep = t + (w.mu != 0 ? a.service : 0.0);
    out.waypoints.push_back(std::move(w));
  }
  return out;
}

Infeasibility reason_from(const Evaluation& ev) {
  if (!ev.payload_ok) return Infeasibility::Payload;
  if (!ev.energy_ok) return Infeasibility::Energy;
  return Infeasibility::Deadline;
}

}  // namespace

Waypoint uav_anchor(const UavState& uav, double now) {
  if (!uav.route.empty()) {
    Waypoint w = uav.route.waypoints.front();
    const bool station_return = w.mu == 0 && uav.route.waypoints.size() == 1;
    if (station_return) {
      // Recharged on arrival; a new sortie starts full.
      w.energy_after = uav.e_max;
      w.payload_after = 0.0;
    }
    return w;
  }
  Waypoint w;
  w.t = std::max(now, uav.available_from);
  w.l = uav.location;
  w.mu = 0;
  w.payload_after = uav.payload;
  w.energy_after = uav.e_remaining;
  return w;
}

Waypoint courier_anchor(const CourierState& courier, double now) {
  if (!courier.route.empty()) {
    return courier.route.waypoints.front();
  }
  Waypoint w;
  w.t = std::max(now, courier.available_from);
  w.l = courier.location;
  w.mu = 0;
  w.payload_after = courier.payload;
  return w;
}

PlanResult plan_uav_insertion(const UavState& uav, const Parcel& p, double now,
                              const FeasibilityConfig& cfg) {
  const Waypoint anchor = uav_anchor(uav, now);
  const bool idle = uav.route.empty();

  AgentModel a;
  a.speed = uav.speed;
  a.service = cfg.service_time;
  a.t0 = anchor.t;
  a.start_load = anchor.payload_after;
  a.track_energy = true;
  a.start_energy = anchor.energy_after.value_or(uav.e_remaining);
  a.reserve = uav.alpha * uav.e_max;
  a.energy = cfg.energy;
  a.free_empty_legs = cfg.free_empty_legs;

  // Necessary conditions on straight-line geometry, before any path search.
  const double latest_drop = p.t_order + cfg.deadline;
  const double anchor_dep = anchor.t + (anchor.mu != 0 ? cfg.service_time : 0.0);
  const double straight_po = euclidean_distance(anchor.l, p.pickup);
  const double straight_pd = euclidean_distance(p.pickup, p.dropoff);
  const double straight_ds = euclidean_distance(p.dropoff, uav.station_location);
  // A prefilter rejection is reported as NoRoute when zones make the parcel
  // unreachable, since then no path exists to break the other limits.
  auto unreachable = [&] {
    if (!cfg.router) return false;
    try {
      cfg.flight(anchor.l, p.pickup);
      cfg.flight(p.pickup, p.dropoff);
      cfg.flight(p.dropoff, uav.station_location);
    } catch (const NoRouteError&) {
      return true;
    }
    return false;
  };
  if (anchor_dep + (straight_po + straight_pd) / uav.speed + cfg.service_time >
      latest_drop + kEps) {
    return Infeasible{unreachable() ? Infeasibility::NoRoute : Infeasibility::Deadline};
  }
  {
    const double loaded = cfg.energy.slope * p.weight + cfg.energy.intercept;
    double lower = loaded * straight_pd / uav.speed;
    if (!cfg.free_empty_legs) {
      lower += cfg.energy.intercept * (straight_po + straight_ds) / uav.speed;
    }
    if (a.start_energy - lower < a.reserve - kEps) {
      return Infeasible{unreachable() ? Infeasibility::NoRoute : Infeasibility::Energy};
    }
  }

  std::vector<Waypoint> core;
  core.push_back(anchor);
  if (!idle) {
    const auto& wps = uav.route.waypoints;
    const std::size_t last = wps.size() - 1;  // station return
    for (std::size_t k = 1; k < last; ++k) core.push_back(wps[k]);
  }

  RouteFrame f;
  f.has_station = true;
  f.station = uav.station_location;
  for (std::size_t k = 0; k < core.size(); ++k) {
    Stop s = stop_from(core[k], uav.jobs, cfg.deadline, true);
    if (k == 0) {
      s.dweight = 0.0;  // already reflected in start_load
      s.dcount = 0;
    }
    f.core.push_back(s);
  }
  f.pickup = {p.pickup, 1, p.weight, 1, kInf};
  f.dropoff = {p.dropoff, -1, -p.weight, -1, latest_drop};

  double old_distance = 0.0;
  try {
    const std::size_t m = core.size();
    f.cc.resize(m > 0 ? m - 1 : 0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      f.cc[k] = cfg.flight(core[k].l, core[k + 1].l);
      old_distance += f.cc[k];
    }
    f.cp.resize(m);
    f.cd.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      f.cp[k] = cfg.flight(core[k].l, p.pickup);
      f.cd[k] = cfg.flight(core[k].l, p.dropoff);
    }
    f.pd = cfg.flight(p.pickup, p.dropoff);
    f.cs = cfg.flight(core.back().l, uav.station_location);
    f.ds = cfg.flight(p.dropoff, uav.station_location);
    if (!idle) old_distance += f.cs;
  } catch (const NoRouteError&) {
    return Infeasible{Infeasibility::NoRoute};
  }

  const SearchResult r = search(f, a);
  if (!r.found) {
    return Infeasible{reason_from(r.closest)};
  }

  Waypoint station;
  station.l = uav.station_location;
  station.mu = 0;
  CandidatePlan c;
  c.agent = {AgentKind::Uav, uav.id};
  c.parcel = p.id;
  c.new_route = materialise(f, a, core, action_waypoint(p, 1),
                            action_waypoint(p, -1), &station, r.best_i,
                            r.best_j, uav.station);
  c.anchor_is_position = idle;
  const double old_end = idle ? anchor.t : uav.route.waypoints.back().t;
  c.route_end = r.best.end_time;
  c.added_time = r.best.end_time - old_end;
  c.cost = c.added_time;
  c.detour = r.best.distance - old_distance;
  c.pickup_time = r.best.pickup_time;
  c.dropoff_time = r.best.dropoff_time;
  c.energy_used = uav.e_max - r.best.final_energy;
  return c;
}

PlanResult plan_courier_insertion(const CourierState& courier, const Parcel& p,
                                  double now, const FeasibilityConfig& cfg) {
  const Waypoint anchor = courier_anchor(courier, now);
  const bool idle = courier.route.empty();

  AgentModel a;
  a.speed = courier.speed;
  a.service = cfg.service_time;
  a.t0 = anchor.t;
  a.start_load = anchor.payload_after;
  a.start_count = static_cast<int>(std::lround(anchor.payload_after));
  a.count_cap = courier.n_max;

  const double latest_drop = p.t_order + cfg.deadline;
  const double anchor_dep = anchor.t + (anchor.mu != 0 ? cfg.service_time : 0.0);
  const double d_ap = manhattan_distance(anchor.l, p.pickup);
  const double d_pd = manhattan_distance(p.pickup, p.dropoff);
  if (anchor_dep + (d_ap + d_pd) / courier.speed + cfg.service_time >
      latest_drop + kEps) {
    return Infeasible{Infeasibility::Deadline};
  }

  std::vector<Waypoint> core;
  core.push_back(anchor);
  if (!idle) {
    const auto& wps = courier.route.waypoints;
    for (std::size_t k = 1; k < wps.size(); ++k) core.push_back(wps[k]);
  }

  RouteFrame f;
  for (std::size_t k = 0; k < core.size(); ++k) {
    Stop s = stop_from(core[k], courier.jobs, cfg.deadline, false);
    if (k == 0) {
      s.dweight = 0.0;
      s.dcount = 0;
    }
    f.core.push_back(s);
  }
  f.pickup = {p.pickup, 1, 1.0, 1, kInf};
  f.dropoff = {p.dropoff, -1, -1.0, -1, latest_drop};

  const std::size_t m = core.size();
  double old_distance = 0.0;
  f.cc.resize(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    f.cc[k] = manhattan_distance(core[k].l, core[k + 1].l);
    old_distance += f.cc[k];
  }
  f.cp.resize(m);
  f.cd.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    f.cp[k] = manhattan_distance(core[k].l, p.pickup);
    f.cd[k] = manhattan_distance(core[k].l, p.dropoff);
  }
  f.pd = d_pd;

  const SearchResult r = search(f, a);
  if (!r.found) {
    return Infeasible{reason_from(r.closest)};
  }

  CandidatePlan c;
  c.agent = {AgentKind::Courier, courier.id};
  c.parcel = p.id;
  c.new_route = materialise(f, a, core, action_waypoint(p, 1),
                            action_waypoint(p, -1), nullptr, r.best_i,
                            r.best_j, courier.station);
  c.anchor_is_position = idle;
  const double old_end = idle ? anchor.t : courier.route.waypoints.back().t;
  c.route_end = r.best.end_time;
  c.added_time = r.best.end_time - old_end;
  c.cost = courier_cost(p.pickup, p.dropoff, cfg);
  c.detour = r.best.distance - old_distance;
  c.pickup_time = r.best.pickup_time;
  c.dropoff_time = r.best.dropoff_time;
  return c;
}

}  // namespace airground
