#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "airground/geo.h"

namespace airground {

// Declaration order doubles as the cross-kind tie-break rank.
enum class AgentKind : std::uint8_t { Uav = 0, Courier = 1, Gv = 2 };

const char* to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);

struct AgentRef {
  AgentKind kind = AgentKind::Uav;
  int id = 0;

  auto operator<=>(const AgentRef&) const = default;
};

std::string to_string(AgentRef ref);

enum class ParcelState : std::uint8_t { Pending, Assigned, Delivered, Failed };

struct Parcel {
  int id = 0;
  double t_order = 0.0;  // seconds since scenario start
  Location pickup;       // restaurant
  Location dropoff;      // destination cabinet
  double weight = 0.5;   // kg

  ParcelState state = ParcelState::Pending;
  std::optional<AgentRef> assigned_to;
  std::optional<double> delivered_at;

  // Status transitions: Pending -> Assigned -> Delivered, Pending -> Failed.
  // Anything else throws std::logic_error.
  void assign(AgentRef agent);
  void deliver(double t);
  void fail();

  std::optional<double> delivery_time() const;
};

// A parcel committed to an agent, shaped for feasibility re-checks.
struct Job {
  int parcel = 0;
  double t_order = 0.0;
  double weight = 0.0;
  Location pickup;
  Location dropoff;
};

Job job_of(const Parcel& p);

// One stop of a UAV or courier route. mu is +1 for a pick-up, -1 for a
// drop-off, and 0 for the route anchor or a station return.
struct Waypoint {
  double t = 0.0;  // arrival time
  Location l;
  std::vector<int> parcels;
  int mu = 0;
  double payload_after = 0.0;  // parcels (courier) or kg (UAV)
  std::optional<double> energy_after;

  bool is_action() const { return mu != 0; }
};

struct RoutePlan {
  std::vector<Waypoint> waypoints;
  int origin_station = -1;

  bool empty() const { return waypoints.empty(); }
};

struct UavState {
  int id = 0;
  int station = 0;
  Location station_location;
  Location location;
  double speed = 16.0;
  double e_max = 770160.0;
  double e_remaining = 770160.0;
  double alpha = 0.1;
  double payload_cap = 2.5;  // kg, feature normalisation only
  double payload = 0.0;      // kg on board
  double available_from = 0.0;
  // Remaining waypoints; front() is the leg target currently being flown.
  RoutePlan route;
  std::vector<Job> jobs;
};

struct CourierState {
  int id = 0;
  int station = 0;
  Location location;
  double speed = 5.0;
  int n_max = 5;
  int payload = 0;
  double available_from = 0.0;
  RoutePlan route;
  std::vector<Job> jobs;
};

// An original task of a ground vehicle (a passenger trip for taxis).
struct Trip {
  Location origin;
  Location destination;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const Trip&) const = default;
};

enum class GvMode : std::uint8_t { OdPair, Halfway, Unoccupied };
const char* to_string(GvMode mode);

enum class GvStopKind : std::uint8_t { Pickup, TripStart, Dropoff, TripEnd };

struct GvStop {
  double t = 0.0;
  Location l;
  GvStopKind kind = GvStopKind::Pickup;
};

// Driving plan of a single-parcel GV delivery.
struct GvPlan {
  int parcel = 0;
  GvMode mode = GvMode::Unoccupied;
  std::vector<GvStop> stops;
  double detour = 0.0;       // d(b,p), meters
  double drop_detour = 0.0;  // d'(b,p), meters
  double drive = 0.0;        // total driven distance attributable to p
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  // Original schedule of the trip this plan rides on, if any.
  std::optional<Trip> original_trip;
  std::optional<Trip> delayed_trip;
};

struct GvDelivery {
  Job job;
  GvPlan plan;
  std::size_t next_stop = 0;
};

struct GvState {
  int id = 0;
  // Original tasks not yet finished, in time order. While occupied,
  // trips.front() is in progress.
  std::vector<Trip> trips;
  bool occupied = false;
  Location location;
  double speed = 8.0;
  double available_from = 0.0;
  std::optional<GvDelivery> active_delivery;
};

struct StatusRecord {
  AgentRef agent;
  double t = 0.0;
  Location location;
  std::optional<double> energy;   // UAV
  std::optional<double> payload;  // UAV kg, courier count
  std::optional<bool> occupied;   // GV
  std::string progress;

  bool operator==(const StatusRecord&) const = default;
};

StatusRecord status_report(const UavState& uav, double now);
StatusRecord status_report(const CourierState& courier, double now);
StatusRecord status_report(const GvState& gv, double now);

// Multiset check: every picked-up parcel is dropped exactly once, after its
// pick-up.
bool pickups_match_dropoffs(const RoutePlan& route,
                            const std::vector<int>& onboard = {});

}  // namespace airground
