#include "airground/agents.h"

#include <map>
#include <stdexcept>

namespace airground {

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Uav:
      return "uav";
    case AgentKind::Courier:
      return "courier";
    case AgentKind::Gv:
      return "gv";
  }
  return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "uav") return AgentKind::Uav;
  if (s == "courier") return AgentKind::Courier;
  if (s == "gv") return AgentKind::Gv;
  throw std::invalid_argument("unknown agent kind: " + s);
}

std::string to_string(AgentRef ref) {
  return std::string(to_string(ref.kind)) + ":" + std::to_string(ref.id);
}

const char* to_string(GvMode mode) {
  switch (mode) {
    case GvMode::OdPair:
      return "od_pair";
    case GvMode::Halfway:
      return "halfway";
    case GvMode::Unoccupied:
      return "unoccupied";
  }
  return "?";
}

void Parcel::assign(AgentRef agent) {
  if (state != ParcelState::Pending) {
    throw std::logic_error("parcel " + std::to_string(id) +
                           " assigned while not pending");
  }
  state = ParcelState::Assigned;
  assigned_to = agent;
}

void Parcel::deliver(double t) {
  if (state != ParcelState::Assigned) {
    throw std::logic_error("parcel " + std::to_string(id) +
                           " delivered while not assigned");
  }
  if (t < t_order) {
    throw std::logic_error("parcel " + std::to_string(id) +
                           " delivered before it was ordered");
  }
  state = ParcelState::Delivered;
  delivered_at = t;
}

void Parcel::fail() {
  if (state != ParcelState::Pending) {
    throw std::logic_error("parcel " + std::to_string(id) +
                           " failed while not pending");
  }
  state = ParcelState::Failed;
}

std::optional<double> Parcel::delivery_time() const {
  if (!delivered_at) {
    return std::nullopt;
  }
  return *delivered_at - t_order;
}

Job job_of(const Parcel& p) {
  return {p.id, p.t_order, p.weight, p.pickup, p.dropoff};
}

StatusRecord status_report(const UavState& uav, double now) {
  StatusRecord r;
  r.agent = {AgentKind::Uav, uav.id};
  r.t = now;
  r.location = uav.location;
  r.energy = uav.e_remaining;
  r.payload = uav.payload;
  r.progress = uav.route.empty()
                   ? "idle"
                   : "route:" + std::to_string(uav.route.waypoints.size());
  return r;
}

StatusRecord status_report(const CourierState& courier, double now) {
  StatusRecord r;
  r.agent = {AgentKind::Courier, courier.id};
  r.t = now;
  r.location = courier.location;
  r.payload = static_cast<double>(courier.payload);
  r.progress = courier.route.empty()
                   ? "idle"
                   : "route:" + std::to_string(courier.route.waypoints.size());
  return r;
}

StatusRecord status_report(const GvState& gv, double now) {
  StatusRecord r;
  r.agent = {AgentKind::Gv, gv.id};
  r.t = now;
  r.location = gv.location;
  r.occupied = gv.occupied;
  if (gv.active_delivery) {
    r.progress = std::string("delivery:") + to_string(gv.active_delivery->plan.mode);
  } else {
    r.progress = gv.occupied ? "trip" : "idle";
  }
  return r;
}

bool pickups_match_dropoffs(const RoutePlan& route,
                            const std::vector<int>& onboard) {
  std::map<int, int> state;  // 1 = on board
  for (int id : onboard) {
    if (state[id] != 0) return false;
    state[id] = 1;
  }
  std::map<int, int> picked;
  for (const auto& w : route.waypoints) {
    for (int id : w.parcels) {
      if (w.mu == 1) {
        if (state[id] != 0 || picked[id] != 0) return false;
        state[id] = 1;
        picked[id] = 1;
      } else if (w.mu == -1) {
        if (state[id] != 1) return false;
        state[id] = 2;
      } else {
        return false;
      }
    }
  }
  for (const auto& [id, s] : state) {
    if (s == 1) return false;
  }
  return true;
}

}  // namespace airground
