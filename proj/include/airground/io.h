#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "airground/agents.h"
#include "airground/feasibility.h"
#include "airground/geo.h"

namespace airground {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class OutOfBounds : public ParseError {
 public:
  using ParseError::ParseError;
};

class InvalidScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

constexpr double kHour = 3600.0;
constexpr double kHorizonStart = 8 * kHour;  // 08:00
constexpr double kHorizonEnd = 20 * kHour;   // 20:00

// ---------------------------------------------------------------------------
// CSV

// Splits one line on commas; quotes and escaped separators are not part of
// the formats read here.
std::vector<std::string> split_csv_line(const std::string& line);

// Seconds since midnight UTC of the timestamp's own day when `time_of_day`
// is set, otherwise seconds since the Unix epoch. Accepts integer or decimal
// epoch seconds and ISO-8601 "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z]".
double parse_timestamp(const std::string& field);
bool looks_like_iso8601(const std::string& field);

// ---------------------------------------------------------------------------
// Orders

struct OrderRecord {
  double t_pickup = 0.0;
  Location pickup;
  double t_dropoff = 0.0;
  Location dropoff;

  bool operator==(const OrderRecord&) const = default;
};

// Header: t_pickup,x_pickup,y_pickup,t_dropoff,x_dropoff,y_dropoff.
// Records are returned sorted by pick-up time; `bounds`, when given, rejects
// locations outside it.
std::vector<OrderRecord> load_orders(const std::string& path,
                                     const std::optional<Rect>& bounds = std::nullopt);
std::vector<OrderRecord> read_orders(std::istream& in,
                                     const std::optional<Rect>& bounds = std::nullopt);
void write_orders(std::ostream& out, const std::vector<OrderRecord>& orders);

// Parcels in time order with ids 0..n-1; weights drawn uniformly in
// [weight_lo, weight_hi] from a stream seeded per parcel.
std::vector<Parcel> parcels_from_orders(const std::vector<OrderRecord>& orders,
                                        std::uint64_t seed, double weight_lo = 0.2,
                                        double weight_hi = 1.0);

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryRecord {
  std::string vehicle;
  double t = 0.0;
  Location l;
  bool occupied = false;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // degrees

  bool operator==(const TrajectoryRecord&) const = default;
};

struct GeoAnchor {
  double lat = 0.0;
  double lon = 0.0;
};

// Header: vehicle_id,t,x,y,occupied,speed,heading. A lon/lat variant
// (vehicle_id,t,lon,lat,...) is projected around `anchor`.
std::vector<TrajectoryRecord> read_trajectories(std::istream& in,
                                                const std::optional<GeoAnchor>& anchor = std::nullopt);
void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& records);

struct VehicleTrace {
  std::string vehicle;
  std::vector<TrajectoryRecord> records;
};

// Groups records per vehicle (sorted by vehicle id). Throws ParseError when a
// vehicle's timestamps decrease.
std::vector<VehicleTrace> group_traces(const std::vector<TrajectoryRecord>& records);

// Trips between a 0->1 and the following 1->0 passenger-status transition.
// A trip already running at the first record or still running at the last
// one is incomplete and dropped.
std::vector<Trip> segment_trips(const VehicleTrace& trace);

// Selects exactly round(ratio * V) vehicles by a seeded shuffle of the sorted
// vehicle ids, so the choice does not depend on file order.
std::vector<std::size_t> sample_vehicles(std::size_t vehicle_count, double ratio,
                                         std::uint64_t seed);

// Vehicles become GvStates with ids 0..k-1 in sorted-id order of the sample,
// starting at their first recorded location.
std::vector<GvState> load_trajectories(const std::string& path, double ratio,
                                       std::uint64_t seed, double gv_speed = 8.0,
                                       const std::optional<GeoAnchor>& anchor = std::nullopt);
std::vector<GvState> gvs_from_records(const std::vector<TrajectoryRecord>& records,
                                      double ratio, std::uint64_t seed, double gv_speed = 8.0);

// ---------------------------------------------------------------------------
// Scenario

struct ScenarioConfig {
  double demand_ratio = 1.0;
  double taxi_ratio = 0.1;
  int uavs_per_station = 25;
  int couriers_per_station = 20;
  int uav_stations = 15;
  int courier_stations = 50;

  // Synthetic generator.
  int base_orders = 22000;
  int fleet_size = 13000;  // candidate GVs before the participation ratio
  double area_width = 40000.0;
  double area_height = 40000.0;
  double delivery_radius = 3000.0;  // cap on |pickup - dropoff| (Euclidean)
  double peak_fraction = 0.6;       // share of orders in the two meal peaks
  double peak_sigma = 2700.0;       // seconds
  double gv_mean_idle = 600.0;      // mean gap between synthetic trips, seconds
  double gv_trip_min = 1000.0;      // synthetic trip length bounds, meters
  double gv_trip_max = 8000.0;
  double weight_lo = 0.2;
  double weight_hi = 1.0;

  std::uint64_t seed = 1;

  void validate() const;
};

struct Scenario {
  ServiceArea area;
  std::vector<Parcel> parcels;  // sorted by t_order, ids equal indices
  std::vector<Location> uav_stations;
  std::vector<Location> courier_stations;
  int uavs_per_station = 25;
  int couriers_per_station = 20;
  std::vector<GvState> gvs;     // ids equal indices, trips in time order
  double horizon_start = kHorizonStart;
  double horizon_end = kHorizonEnd;

  // Throws InvalidScenario.
  void validate() const;
};

// Synthetic day: two-peak arrivals, uniform locations within the delivery
// radius, uniformly placed stations and random GV trip chains.
Scenario synth_scenario(const ScenarioConfig& cfg);
// Order arrival times only, for distribution checks.
std::vector<double> synth_arrival_times(const ScenarioConfig& cfg, std::size_t count);

struct ScenarioFiles {
  std::string orders;        // orders.csv
  std::string trajectories;  // trajectories.csv
};

// scenario.json: config, file references and station coordinates.
void save_scenario(const std::string& dir, const Scenario& s, const ScenarioConfig& cfg);
Scenario load_scenario(const std::string& path, ScenarioConfig* cfg = nullptr);

// Day index (1-based) of a timestamp counted from `origin`, and the split
// used for replaying a month: days 1-23 train, 24-30 evaluate.
int day_of(double t, double origin);
bool is_training_day(int day);

}  // namespace airground
