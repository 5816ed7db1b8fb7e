#include <algorithm>
#include <cmath>

#include "airground/io.h"
#include "airground/random.h"

namespace airground {

namespace {

// Stream labels for derive_seed.
enum Stream : std::uint64_t {
  kArrivals = 1,
  kLocations = 2,
  kWeights = 3,
  kStations = 4,
  kSample = 5,
  kVehicleBase = 1000,
};

constexpr double kTripSpeed = 8.0;
constexpr double kTripHandling = 60.0;

Location clamp_to(const Rect& r, Location p) {
  return {std::clamp(p.x, r.min_x, r.max_x), std::clamp(p.y, r.min_y, r.max_y)};
}

Location uniform_point(Rng& rng, const Rect& r) {
  const double x = rng.uniform(r.min_x, r.max_x);
  const double y = rng.uniform(r.min_y, r.max_y);
  return {x, y};
}

// Uniform over the disc of radius `radius` around c.
Location disc_point(Rng& rng, Location c, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double a = 2.0 * M_PI * rng.uniform();
  return {c.x + r * std::cos(a), c.y + r * std::sin(a)};
}

GvState synth_vehicle(const ScenarioConfig& cfg, const Rect& bounds, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, kVehicleBase + index));
  GvState g;
  g.location = uniform_point(rng, bounds);
  g.available_from = kHorizonStart - rng.uniform(0.0, kHour);
  Location at = g.location;
  double t = g.available_from;
  for (;;) {
    const Location origin = clamp_to(bounds, disc_point(rng, at, 1500.0));
    const double reposition = manhattan_distance(at, origin) / kTripSpeed;
    const double start = t + reposition + rng.exponential(cfg.gv_mean_idle);
    if (start > kHorizonEnd + kHour) break;
    const double length = rng.uniform(cfg.gv_trip_min, cfg.gv_trip_max);
    const double heading = 2.0 * M_PI * rng.uniform();
    const Location dest = clamp_to(
        bounds, {origin.x + length * std::cos(heading), origin.y + length * std::sin(heading)});
    const double end = start + manhattan_distance(origin, dest) / kTripSpeed + kTripHandling;
    g.trips.push_back({origin, dest, start, end});
    at = dest;
    t = end;
  }
  return g;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto ratio_ok = [](double r) { return r > 0.0 && r <= 1.0; };
  if (!ratio_ok(demand_ratio)) throw InvalidConfig("demand ratio must lie in (0, 1]");
  if (!ratio_ok(taxi_ratio)) throw InvalidConfig("taxi ratio must lie in (0, 1]");
  if (uavs_per_station < 0 || couriers_per_station < 0 || uav_stations < 0 ||
      courier_stations < 0 || base_orders < 0 || fleet_size < 0) {
    throw InvalidConfig("counts must be non-negative");
  }
  if (!(area_width > 0) || !(area_height > 0)) throw InvalidConfig("area must be non-empty");
  if (!(delivery_radius > 0)) throw InvalidConfig("delivery radius must be positive");
  if (!(peak_fraction >= 0 && peak_fraction <= 1)) throw InvalidConfig("peak fraction must lie in [0, 1]");
  if (!(peak_sigma > 0) || !(gv_mean_idle > 0)) throw InvalidConfig("spreads must be positive");
  if (!(gv_trip_min > 0) || gv_trip_max < gv_trip_min) throw InvalidConfig("bad GV trip lengths");
  if (!(weight_lo > 0) || weight_hi < weight_lo) throw InvalidConfig("bad parcel weights");
}

std::vector<double> synth_arrival_times(const ScenarioConfig& cfg, std::size_t count) {
  Rng rng(derive_seed(cfg.seed, kArrivals));
  std::vector<double> out;
  out.reserve(count);
  const double peaks[] = {11 * kHour, 18 * kHour};
  for (std::size_t i = 0; i < count; ++i) {
    double t;
    if (rng.bernoulli(cfg.peak_fraction)) {
      const double centre = peaks[rng.below(2)];
      do {
        t = centre + cfg.peak_sigma * rng.normal();
      } while (t < kHorizonStart || t >= kHorizonEnd);
    } else {
      t = rng.uniform(kHorizonStart, kHorizonEnd);
    }
    out.push_back(t);
  }
  return out;
}

Scenario synth_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.area.bounds = {0.0, 0.0, cfg.area_width, cfg.area_height};
  const Rect& b = s.area.bounds;
  s.uavs_per_station = cfg.uavs_per_station;
  s.couriers_per_station = cfg.couriers_per_station;

  Rng stations(derive_seed(cfg.seed, kStations));
  for (int k = 0; k < cfg.uav_stations; ++k) s.uav_stations.push_back(uniform_point(stations, b));
  for (int k = 0; k < cfg.courier_stations; ++k) {
    s.courier_stations.push_back(uniform_point(stations, b));
  }

  const auto count = static_cast<std::size_t>(std::llround(cfg.demand_ratio * cfg.base_orders));
  const auto times = synth_arrival_times(cfg, count);
  Rng loc(derive_seed(cfg.seed, kLocations));
  std::vector<OrderRecord> orders;
  orders.reserve(count);
  for (double t : times) {
    OrderRecord r;
    r.t_pickup = t;
    r.pickup = uniform_point(loc, b);
    do {
      r.dropoff = disc_point(loc, r.pickup, cfg.delivery_radius);
    } while (!b.contains(r.dropoff));
    r.t_dropoff = t;
    orders.push_back(r);
  }
  std::stable_sort(orders.begin(), orders.end(), [](const OrderRecord& a, const OrderRecord& c) {
    return a.t_pickup < c.t_pickup;
  });
  s.parcels = parcels_from_orders(orders, derive_seed(cfg.seed, kWeights), cfg.weight_lo,
                                  cfg.weight_hi);

  const auto chosen = sample_vehicles(static_cast<std::size_t>(cfg.fleet_size), cfg.taxi_ratio,
                                      derive_seed(cfg.seed, kSample));
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    GvState g = synth_vehicle(cfg, b, chosen[k]);
    g.id = static_cast<int>(k);
    s.gvs.push_back(std::move(g));
  }
  return s;
}

}  // namespace airground
