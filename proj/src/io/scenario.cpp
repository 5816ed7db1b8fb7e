#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "airground/io.h"
#include "airground/random.h"

namespace airground {

namespace {

using nlohmann::json;

json point(Location l) { return json::array({l.x, l.y}); }

Location to_point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidScenario("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json config_json(const ScenarioConfig& c) {
  return {{"demand_ratio", c.demand_ratio},
          {"taxi_ratio", c.taxi_ratio},
          {"uavs_per_station", c.uavs_per_station},
          {"couriers_per_station", c.couriers_per_station},
          {"uav_stations", c.uav_stations},
          {"courier_stations", c.courier_stations},
          {"base_orders", c.base_orders},
          {"fleet_size", c.fleet_size},
          {"area_width", c.area_width},
          {"area_height", c.area_height},
          {"delivery_radius", c.delivery_radius},
          {"peak_fraction", c.peak_fraction},
          {"peak_sigma", c.peak_sigma},
          {"gv_mean_idle", c.gv_mean_idle},
          {"gv_trip_min", c.gv_trip_min},
          {"gv_trip_max", c.gv_trip_max},
          {"weight_lo", c.weight_lo},
          {"weight_hi", c.weight_hi},
          {"seed", c.seed}};
}

ScenarioConfig config_from(const json& j) {
  ScenarioConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("demand_ratio", c.demand_ratio);
  get("taxi_ratio", c.taxi_ratio);
  get("uavs_per_station", c.uavs_per_station);
  get("couriers_per_station", c.couriers_per_station);
  get("uav_stations", c.uav_stations);
  get("courier_stations", c.courier_stations);
  get("base_orders", c.base_orders);
  get("fleet_size", c.fleet_size);
  get("area_width", c.area_width);
  get("area_height", c.area_height);
  get("delivery_radius", c.delivery_radius);
  get("peak_fraction", c.peak_fraction);
  get("peak_sigma", c.peak_sigma);
  get("gv_mean_idle", c.gv_mean_idle);
  get("gv_trip_min", c.gv_trip_min);
  get("gv_trip_max", c.gv_trip_max);
  get("weight_lo", c.weight_lo);
  get("weight_hi", c.weight_hi);
  get("seed", c.seed);
  return c;
}

std::vector<TrajectoryRecord> records_of(const std::vector<GvState>& gvs) {
  std::vector<TrajectoryRecord> out;
  for (const auto& g : gvs) {
    char name[32];
    std::snprintf(name, sizeof name, "v%07d", g.id);
    out.push_back({name, g.available_from, g.location, false, 0.0, 0.0});
    for (const auto& t : g.trips) {
      out.push_back({name, t.start, t.origin, true, 0.0, 0.0});
      out.push_back({name, t.end, t.destination, false, 0.0, 0.0});
    }
  }
  return out;
}

}  // namespace

void Scenario::validate() const {
  try {
    area.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidScenario(e.what());
  }
  if (!(horizon_start < horizon_end)) throw InvalidScenario("empty horizon");
  if (uavs_per_station < 0 || couriers_per_station < 0) {
    throw InvalidScenario("agent counts must be non-negative");
  }
  const Rect& b = area.bounds;
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const Parcel& p = parcels[i];
    if (p.id != static_cast<int>(i)) throw InvalidScenario("parcel ids must equal their index");
    if (i > 0 && p.t_order < parcels[i - 1].t_order) {
      throw InvalidScenario("parcels not sorted by ordering time");
    }
    if (!(p.weight > 0)) throw InvalidScenario("parcel weight must be positive");
    if (!b.contains(p.pickup) || !b.contains(p.dropoff)) {
      throw InvalidScenario("parcel " + std::to_string(p.id) + " outside the service area");
    }
    if (area.inside_zone(p.pickup) || area.inside_zone(p.dropoff)) {
      throw InvalidScenario("parcel " + std::to_string(p.id) + " inside a no-fly zone");
    }
    if (p.state != ParcelState::Pending) throw InvalidScenario("parcels must start pending");
  }
  for (const auto* list : {&uav_stations, &courier_stations}) {
    for (const auto& s : *list) {
      if (!b.contains(s) || area.inside_zone(s)) throw InvalidScenario("station outside the usable area");
    }
  }
  for (std::size_t k = 0; k < gvs.size(); ++k) {
    const GvState& g = gvs[k];
    if (g.id != static_cast<int>(k)) throw InvalidScenario("GV ids must equal their index");
    if (!(g.speed > 0)) throw InvalidScenario("GV speed must be positive");
    if (!b.contains(g.location)) throw InvalidScenario("GV outside the service area");
    double last_end = -1e300;
    for (const auto& t : g.trips) {
      if (t.end < t.start || t.start < last_end) {
        throw InvalidScenario("GV " + std::to_string(g.id) + " trips overlap or run backwards");
      }
      if (!b.contains(t.origin) || !b.contains(t.destination)) {
        throw InvalidScenario("GV " + std::to_string(g.id) + " trip outside the service area");
      }
      last_end = t.end;
    }
  }
}

void save_scenario(const std::string& dir, const Scenario& s, const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::vector<OrderRecord> orders;
    orders.reserve(s.parcels.size());
    for (const auto& p : s.parcels) orders.push_back({p.t_order, p.pickup, p.t_order, p.dropoff});
    std::ofstream out(fs::path(dir) / "orders.csv");
    write_orders(out, orders);
  }
  {
    std::ofstream out(fs::path(dir) / "trajectories.csv");
    write_trajectories(out, records_of(s.gvs));
  }
  json zones = json::array();
  for (const auto& z : s.area.no_fly_zones) {
    json poly = json::array();
    for (const auto& v : z.vertices) poly.push_back(point(v));
    zones.push_back(poly);
  }
  json stations_u = json::array();
  for (const auto& l : s.uav_stations) stations_u.push_back(point(l));
  json stations_c = json::array();
  for (const auto& l : s.courier_stations) stations_c.push_back(point(l));
  std::vector<double> weights;
  for (const auto& p : s.parcels) weights.push_back(p.weight);
  const json doc = {
      {"version", 1},
      {"config", config_json(cfg)},
      {"orders", "orders.csv"},
      {"trajectories", "trajectories.csv"},
      {"gv_sample_ratio", 1.0},
      {"gv_sample_seed", 0},
      {"gv_speed", s.gvs.empty() ? 8.0 : s.gvs.front().speed},
      {"time_origin", 0.0},
      {"area",
       {{"bounds", {s.area.bounds.min_x, s.area.bounds.min_y, s.area.bounds.max_x,
                    s.area.bounds.max_y}},
        {"grid_resolution", s.area.grid_resolution},
        {"no_fly_zones", zones}}},
      {"uav_stations", stations_u},
      {"courier_stations", stations_c},
      {"uavs_per_station", s.uavs_per_station},
      {"couriers_per_station", s.couriers_per_station},
      {"horizon", {s.horizon_start, s.horizon_end}},
      {"parcel_weights", weights}};
  std::ofstream out(fs::path(dir) / "scenario.json");
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing scenario to " + dir);
}

Scenario load_scenario(const std::string& path, ScenarioConfig* cfg_out) {
  namespace fs = std::filesystem;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("scenario.json: ") + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  try {
    const ScenarioConfig cfg = doc.contains("config") ? config_from(doc.at("config")) : ScenarioConfig{};
    if (cfg_out) *cfg_out = cfg;
    Scenario s;
    const auto& area = doc.at("area");
    const auto& bounds = area.at("bounds");
    s.area.bounds = {bounds.at(0).get<double>(), bounds.at(1).get<double>(),
                     bounds.at(2).get<double>(), bounds.at(3).get<double>()};
    s.area.grid_resolution = area.value("grid_resolution", 50.0);
    for (const auto& z : area.value("no_fly_zones", json::array())) {
      ConvexPolygon poly;
      for (const auto& v : z) poly.vertices.push_back(to_point(v));
      s.area.no_fly_zones.push_back(std::move(poly));
    }
    for (const auto& l : doc.at("uav_stations")) s.uav_stations.push_back(to_point(l));
    for (const auto& l : doc.at("courier_stations")) s.courier_stations.push_back(to_point(l));
    s.uavs_per_station = doc.value("uavs_per_station", cfg.uavs_per_station);
    s.couriers_per_station = doc.value("couriers_per_station", cfg.couriers_per_station);
    if (doc.contains("horizon")) {
      s.horizon_start = doc.at("horizon").at(0).get<double>();
      s.horizon_end = doc.at("horizon").at(1).get<double>();
    }
    const double origin = doc.value("time_origin", 0.0);

    auto orders = load_orders((base / doc.at("orders").get<std::string>()).string(), s.area.bounds);
    for (auto& o : orders) {
      o.t_pickup -= origin;
      o.t_dropoff -= origin;
    }
    s.parcels = parcels_from_orders(orders, derive_seed(cfg.seed, 3), cfg.weight_lo, cfg.weight_hi);
    if (doc.contains("parcel_weights")) {
      const auto& w = doc.at("parcel_weights");
      if (w.size() != s.parcels.size()) throw InvalidScenario("parcel_weights length mismatch");
      for (std::size_t i = 0; i < s.parcels.size(); ++i) s.parcels[i].weight = w.at(i).get<double>();
    }

    std::ifstream tin(base / doc.at("trajectories").get<std::string>());
    if (!tin) throw std::runtime_error("cannot read trajectories for " + path);
    std::optional<GeoAnchor> anchor;
    if (doc.contains("geo_anchor")) {
      anchor = GeoAnchor{doc.at("geo_anchor").at(0).get<double>(),
                         doc.at("geo_anchor").at(1).get<double>()};
    }
    auto records = read_trajectories(tin, anchor);
    for (auto& r : records) r.t -= origin;
    s.gvs = gvs_from_records(records, doc.value("gv_sample_ratio", cfg.taxi_ratio),
                             doc.value("gv_sample_seed", cfg.seed), doc.value("gv_speed", 8.0));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("scenario.json: ") + e.what());
  }
}

}  // namespace airground
