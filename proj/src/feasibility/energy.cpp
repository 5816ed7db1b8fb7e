#include <cmath>

#include "airground/feasibility.h"

namespace airground {

const char* to_string(Infeasibility reason) {
  switch (reason) {
    case Infeasibility::Energy:
      return "energy";
    case Infeasibility::Deadline:
      return "deadline";
    case Infeasibility::NoRoute:
      return "no_route";
    case Infeasibility::Payload:
      return "payload";
    case Infeasibility::Detour:
      return "detour";
    case Infeasibility::PickupWindow:
      return "pickup_window";
    case Infeasibility::Busy:
      return "busy";
  }
  return "?";
}

double power_rate(double weight, const EnergyModelParams& params) {
  if (weight < 0.0 || std::isnan(weight)) {
    throw NegativeWeightError("payload weight must be non-negative");
  }
  return params.slope * weight + params.intercept;
}

double path_energy(RoutePlan& route, double speed,
                   const EnergyModelParams& params, bool free_empty_legs,
                   const FlightRouter* router) {
  auto& wps = route.waypoints;
  if (wps.empty()) {
    return 0.0;
  }
  const double start = wps.front().energy_after.value_or(0.0);
  wps.front().energy_after = start;
  double used = 0.0;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    const double dist = router ? router->distance(wps[i].l, wps[i + 1].l)
                               : euclidean_distance(wps[i].l, wps[i + 1].l);
    const double w = wps[i].payload_after;
    const double rate =
        (free_empty_legs && w <= 0.0) ? 0.0 : power_rate(w, params);
    used += rate * travel_time(dist, speed);
    wps[i + 1].energy_after = start - used;
  }
  return used;
}

double courier_cost(Location pickup, Location dropoff,
                    const FeasibilityConfig& cfg) {
  return cfg.courier_rate * manhattan_distance(pickup, dropoff) / 1000.0;
}

double gv_cost(GvMode mode, double detour, double drop_detour, double drive,
               const FeasibilityConfig& cfg) {
  switch (mode) {
    case GvMode::OdPair:
      return 2.0 * cfg.gv_rate * detour / 1000.0;
    case GvMode::Halfway:
      return 2.0 * cfg.gv_rate * (detour + drop_detour) / 1000.0;
    case GvMode::Unoccupied:
      return cfg.gv_rate * drive / 1000.0;
  }
  return 0.0;
}

}  // namespace airground
