#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <queue>

#include "airground/sim.h"

namespace airground {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::TwoStage: return "two-stage";
    case Policy::CostGreedy: return "cost-greedy";
    case Policy::OnDemand: return "on-demand";
    case Policy::UavTaxi: return "uav-taxi";
  }
  return "?";
}

Policy policy_from_string(const std::string& s) {
  if (s == "two-stage") return Policy::TwoStage;
  if (s == "cost-greedy") return Policy::CostGreedy;
  if (s == "on-demand") return Policy::OnDemand;
  if (s == "uav-taxi") return Policy::UavTaxi;
  throw std::invalid_argument("unknown policy: " + s);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Registry build_registry(const Scenario& s, const FleetConfig& fleet) {
  Registry reg;
  for (std::size_t st = 0; st < s.uav_stations.size(); ++st) {
    for (int k = 0; k < s.uavs_per_station; ++k) {
      UavState u;
      u.id = static_cast<int>(reg.uavs.size());
      u.station = static_cast<int>(st);
      u.station_location = s.uav_stations[st];
      u.location = s.uav_stations[st];
      u.speed = fleet.uav_speed;
      u.e_max = u.e_remaining = fleet.uav_e_max;
      u.alpha = fleet.uav_alpha;
      u.payload_cap = fleet.uav_payload_cap;
      u.available_from = s.horizon_start;
      reg.uavs.push_back(u);
    }
  }
  for (std::size_t st = 0; st < s.courier_stations.size(); ++st) {
    for (int k = 0; k < s.couriers_per_station; ++k) {
      CourierState c;
      c.id = static_cast<int>(reg.couriers.size());
      c.station = static_cast<int>(st);
      c.location = s.courier_stations[st];
      c.speed = fleet.courier_speed;
      c.n_max = fleet.courier_n_max;
      c.available_from = s.horizon_start;
      reg.couriers.push_back(c);
    }
  }
  reg.gvs = s.gvs;
  return reg;
}

namespace {

// Declaration order is the rank used to order simultaneous events.
enum class EventKind : std::uint8_t {
  Arrival,
  GvTripEnd,
  GvTripStart,
  OrderArrival,
  DispatchRetry,
  SimEnd,
};

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::SimEnd;
  long entity = 0;
  long seq = 0;
  AgentRef agent;
  int parcel = -1;
  long token = 0;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.entity != b.entity) return a.entity > b.entity;
    return a.seq > b.seq;
  }
};

long entity_of(AgentRef a) { return static_cast<long>(a.kind) * 1000000000L + a.id; }

constexpr double kTimeSlack = 1e-6;

class Engine {
 public:
  Engine(const Scenario& s, Policy policy, const SimConfig& cfg, const PreferenceModels* models,
         const DispatchObserver& observer)
      : scenario_(s), policy_(policy), cfg_(cfg), models_(models), observer_(observer) {
    if (policy == Policy::TwoStage && !models) {
      throw std::invalid_argument("the two-stage policy needs preference models");
    }
    s.validate();
    reg_ = build_registry(s, cfg.fleet);
    parcels_ = s.parcels;
    params_ = cfg.dispatch;
    params_.verify_commits = cfg.verify_commits;
    if (params_.features.bounds.width() <= 0) params_.features.bounds = s.area.bounds;
    if (!params_.feasibility.router && !s.area.no_fly_zones.empty()) {
      params_.feasibility.router = std::make_shared<const FlightRouter>(s.area);
    }
    tokens_[0].assign(reg_.uavs.size(), 0);
    tokens_[1].assign(reg_.couriers.size(), 0);
    tokens_[2].assign(reg_.gvs.size(), 0);
    committed_.assign(parcels_.size(), {});
    v_max_ = cfg.fleet.courier_speed;
    if (!reg_.uavs.empty()) v_max_ = std::max(v_max_, cfg.fleet.uav_speed);
    for (const auto& g : reg_.gvs) v_max_ = std::max(v_max_, g.speed);
  }

  SimResult run() {
    for (const auto& p : parcels_) {
      Event e;
      e.t = p.t_order;
      e.kind = EventKind::OrderArrival;
      e.entity = p.id;
      e.parcel = p.id;
      push(e);
    }
    for (const auto& g : reg_.gvs) schedule_trip_start(g.id);
    Event end;
    end.t = scenario_.horizon_end + cfg_.drain;
    end.kind = EventKind::SimEnd;
    push(end);

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      now_ = e.t;
      if (e.kind == EventKind::SimEnd) break;
      switch (e.kind) {
        case EventKind::OrderArrival: on_order(e.parcel); break;
        case EventKind::DispatchRetry: on_retry(); break;
        case EventKind::Arrival:
          if (stale(e)) break;
          if (e.agent.kind == AgentKind::Gv) {
            on_gv_stop(e.agent.id);
          } else {
            on_waypoint(e.agent);
          }
          break;
        case EventKind::GvTripStart:
          if (!stale(e)) on_trip_start(e.agent.id);
          break;
        case EventKind::GvTripEnd:
          if (!stale(e)) on_trip_end(e.agent.id);
          break;
        case EventKind::SimEnd: break;
      }
    }
    m_.pending = m_.ordered - m_.delivered - m_.failed;
    emit(now_, "end", "sim", {"pending=" + std::to_string(m_.pending)});
    finalize_metrics(m_);

    SimResult r;
    r.metrics = m_;
    r.log = std::move(log_);
    r.parcels = std::move(parcels_);
    r.registry = std::move(reg_);
    r.dispatch_rounds = rounds_;
    return r;
  }

 private:
  struct Commitment {
    AgentRef agent;
    double raw_cost = 0.0;
    double cost = 0.0;
  };

  void push(Event e) {
    e.seq = seq_++;
    queue_.push(e);
  }

  long& token(AgentRef a) { return tokens_[static_cast<int>(a.kind)][a.id]; }
  bool stale(const Event& e) { return e.token != token(e.agent); }

  void schedule_agent(AgentRef a, double t, EventKind kind) {
    Event e;
    e.t = t;
    e.kind = kind;
    e.agent = a;
    e.entity = entity_of(a);
    e.token = ++token(a);
    push(e);
  }

  void emit(double t, const char* kind, const std::string& entity,
            std::initializer_list<std::string> fields) {
    if (!cfg_.record_log) return;
    std::string line = format_number(t);
    line += '\t';
    line += kind;
    line += '\t';
    line += entity;
    for (const auto& f : fields) {
      line += '\t';
      line += f;
    }
    log_.push_back(std::move(line));
  }

  static std::string parcel_entity(int id) { return "parcel:" + std::to_string(id); }

  // --- orders and dispatch ------------------------------------------------

  void on_order(int id) {
    ++m_.ordered;
    emit(now_, "order", parcel_entity(id), {});
    pending_.push_back(id);
    fail_expired();
    if (parcels_[id].state == ParcelState::Pending) dispatch({id});
    ensure_retry();
  }

  void on_retry() {
    retry_at_.reset();
    fail_expired();
    if (!pending_.empty()) dispatch(pending_);
    ensure_retry();
  }

  void ensure_retry() {
    if (pending_.empty() || retry_at_) return;
    const double step = cfg_.retry_interval;
    const double k = std::floor((now_ - scenario_.horizon_start) / step) + 1.0;
    Event e;
    e.t = scenario_.horizon_start + k * step;
    e.kind = EventKind::DispatchRetry;
    retry_at_ = e.t;
    push(e);
  }

  // A pending parcel fails once even the fastest agent flying straight from
  // its pick-up could no longer make the deadline.
  void fail_expired() {
    const auto& f = params_.feasibility;
    std::vector<int> keep;
    for (int id : pending_) {
      Parcel& p = parcels_[id];
      const double earliest =
          now_ + euclidean_distance(p.pickup, p.dropoff) / v_max_ + f.service_time;
      if (earliest > p.t_order + f.deadline) {
        p.fail();
        ++m_.failed;
        emit(now_, "fail", parcel_entity(id), {});
      } else {
        keep.push_back(id);
      }
    }
    pending_ = std::move(keep);
  }

  void dispatch(const std::vector<int>& ids) {
    ++rounds_;
    std::vector<const Parcel*> batch;
    for (int id : ids) batch.push_back(&parcels_[id]);
    std::vector<AssignmentDecision> decisions;
    switch (policy_) {
      case Policy::TwoStage: {
        StageResult stage = preference_stage(batch, reg_, *models_, now_, params_);
        decisions = std::move(stage.decisions);
        std::vector<const Parcel*> rest;
        for (int id : stage.remaining) rest.push_back(&parcels_[id]);
        auto second = greedy_gapar(rest, reg_, now_, params_);
        for (auto& d : second) decisions.push_back(std::move(d));
        break;
      }
      case Policy::CostGreedy:
        decisions = dispatch_cost_greedy(batch, reg_, now_, params_, cfg_.cost_greedy_kinds, observer_);
        break;
      case Policy::OnDemand:
        decisions = dispatch_on_demand(batch, reg_, now_, params_);
        break;
      case Policy::UavTaxi:
        decisions = dispatch_cost_greedy(batch, reg_, now_, params_, {true, false, true}, observer_);
        break;
    }
    for (const auto& d : decisions) accept(d);
  }

  void accept(const AssignmentDecision& d) {
    Parcel& p = parcels_[d.parcel];
    p.assign(d.agent);
    committed_[d.parcel] = {d.agent, d.raw_cost, d.cost};
    pending_.erase(std::remove(pending_.begin(), pending_.end(), d.parcel), pending_.end());
    std::vector<std::string> fields = {"agent=" + to_string(d.agent),
                                       "cost=" + format_number(d.cost),
                                       "raw=" + format_number(d.raw_cost)};
    if (d.plan.gv_plan) fields.push_back(std::string("mode=") + to_string(d.plan.gv_plan->mode));
    if (cfg_.record_log) {
      std::string line = format_number(now_) + "\tassign\t" + parcel_entity(d.parcel);
      for (const auto& f : fields) line += "\t" + f;
      log_.push_back(std::move(line));
    }
    switch (d.agent.kind) {
      case AgentKind::Uav: {
        const auto& u = reg_.uavs[d.agent.id];
        schedule_agent(d.agent, u.route.waypoints.front().t, EventKind::Arrival);
        break;
      }
      case AgentKind::Courier: {
        const auto& c = reg_.couriers[d.agent.id];
        schedule_agent(d.agent, c.route.waypoints.front().t, EventKind::Arrival);
        break;
      }
      case AgentKind::Gv: {
        const auto& g = reg_.gvs[d.agent.id];
        schedule_agent(d.agent, g.active_delivery->plan.stops.front().t, EventKind::Arrival);
        break;
      }
    }
  }

  // --- execution ------------------------------------------------------------

  void deliver(int id, AgentRef agent) {
    Parcel& p = parcels_[id];
    p.deliver(now_);
    const double dt = now_ - p.t_order;
    if (dt > params_.feasibility.deadline + kTimeSlack) {
      throw ExecutionViolation("parcel " + std::to_string(id) + " delivered after its deadline");
    }
    const Commitment& c = committed_[id];
    if (!(c.agent == agent)) throw ExecutionViolation("parcel delivered by a different agent");
    ++m_.delivered;
    m_.delivery_minutes.push_back(dt / 60.0);
    switch (agent.kind) {
      case AgentKind::Uav:
        ++m_.delivered_uav;
        m_.uav_seconds += c.raw_cost;
        break;
      case AgentKind::Courier:
        ++m_.delivered_courier;
        m_.courier_cost += c.raw_cost;
        break;
      case AgentKind::Gv:
        ++m_.delivered_gv;
        m_.gv_cost += c.raw_cost;
        break;
    }
    emit(now_, "deliver", parcel_entity(id),
         {"agent=" + to_string(agent), "t_order=" + format_number(p.t_order),
          "raw=" + format_number(c.raw_cost)});
  }

  template <class Agent>
  void drop_job(Agent& a, int id) {
    a.jobs.erase(std::remove_if(a.jobs.begin(), a.jobs.end(),
                                [id](const Job& j) { return j.parcel == id; }),
                 a.jobs.end());
  }

  void on_waypoint(AgentRef ref) {
    const double svc = params_.feasibility.service_time;
    if (ref.kind == AgentKind::Uav) {
      UavState& u = reg_.uavs[ref.id];
      const Waypoint w = u.route.waypoints.front();
      const auto& f = params_.feasibility;
      const double rate = (f.free_empty_legs && u.payload <= 1e-12)
                              ? 0.0
                              : power_rate(std::max(0.0, u.payload), f.energy);
      u.e_remaining -= rate * f.flight(u.location, w.l) / u.speed;
      if (u.e_remaining < -kTimeSlack) {
        throw ExecutionViolation("UAV " + std::to_string(u.id) + " ran out of energy");
      }
      u.location = w.l;
      for (int id : w.parcels) {
        if (w.mu == 1) {
          u.payload += parcels_[id].weight;
          emit(now_, "pickup", parcel_entity(id), {"agent=" + to_string(ref)});
        } else if (w.mu == -1) {
          u.payload -= parcels_[id].weight;
          deliver(id, ref);
          drop_job(u, id);
        }
      }
      if (std::abs(u.payload) < 1e-9) u.payload = 0.0;
      if (w.mu == 0) {
        if (u.e_remaining < u.alpha * u.e_max - 1e-6 * u.e_max) {
          throw ExecutionViolation("UAV " + std::to_string(u.id) + " returned below its reserve");
        }
        if (u.payload != 0.0) throw ExecutionViolation("UAV returned with parcels on board");
        u.e_remaining = u.e_max;
      }
      u.route.waypoints.erase(u.route.waypoints.begin());
      u.available_from = now_ + (w.mu != 0 ? svc : 0.0);
      if (!u.route.empty()) schedule_agent(ref, u.route.waypoints.front().t, EventKind::Arrival);
      reg_.report(status_report(u, now_));
      return;
    }
    CourierState& c = reg_.couriers[ref.id];
    const Waypoint w = c.route.waypoints.front();
    c.location = w.l;
    for (int id : w.parcels) {
      if (w.mu == 1) {
        ++c.payload;
        emit(now_, "pickup", parcel_entity(id), {"agent=" + to_string(ref)});
      } else if (w.mu == -1) {
        --c.payload;
        deliver(id, ref);
        drop_job(c, id);
      }
    }
    if (c.payload > c.n_max || c.payload < 0) {
      throw ExecutionViolation("courier " + std::to_string(c.id) + " payload out of range");
    }
    c.route.waypoints.erase(c.route.waypoints.begin());
    c.available_from = now_ + (w.mu != 0 ? svc : 0.0);
    if (!c.route.empty()) schedule_agent(ref, c.route.waypoints.front().t, EventKind::Arrival);
    reg_.report(status_report(c, now_));
  }

  void schedule_trip_start(int gv) {
    const GvState& g = reg_.gvs[gv];
    if (g.trips.empty()) return;
    schedule_agent({AgentKind::Gv, gv}, std::max(g.trips.front().start, now_), EventKind::GvTripStart);
  }

  void on_trip_start(int gv) {
    GvState& g = reg_.gvs[gv];
    const Trip& t = g.trips.front();
    g.occupied = true;
    g.location = t.origin;
    emit(now_, "trip_start", "gv:" + std::to_string(gv), {});
    reg_.report(status_report(g, now_));
    schedule_agent({AgentKind::Gv, gv}, t.end, EventKind::GvTripEnd);
  }

  void on_trip_end(int gv) {
    GvState& g = reg_.gvs[gv];
    g.occupied = false;
    g.location = g.trips.front().destination;
    g.available_from = now_;
    g.trips.erase(g.trips.begin());
    emit(now_, "trip_end", "gv:" + std::to_string(gv), {});
    reg_.report(status_report(g, now_));
    schedule_trip_start(gv);
  }

  void on_gv_stop(int gv) {
    GvState& g = reg_.gvs[gv];
    GvDelivery& d = *g.active_delivery;
    const GvStop stop = d.plan.stops[d.next_stop];
    const AgentRef ref{AgentKind::Gv, gv};
    g.location = stop.l;
    switch (stop.kind) {
      case GvStopKind::Pickup:
        emit(now_, "pickup", parcel_entity(d.job.parcel), {"agent=" + to_string(ref)});
        break;
      case GvStopKind::TripStart:
        g.occupied = true;
        emit(now_, "trip_start", "gv:" + std::to_string(gv), {});
        reg_.report(status_report(g, now_));
        break;
      case GvStopKind::Dropoff:
        deliver(d.job.parcel, ref);
        break;
      case GvStopKind::TripEnd: {
        g.occupied = false;
        const auto& plan = d.plan;
        if (plan.original_trip && plan.delayed_trip) {
          const double limit = (plan.detour + plan.drop_detour) / g.speed +
                               2.0 * params_.feasibility.service_time + kTimeSlack;
          if (plan.delayed_trip->end - plan.original_trip->end > limit) {
            throw ExecutionViolation("GV " + std::to_string(gv) + " task delayed beyond its detour");
          }
        }
        g.trips.erase(g.trips.begin());
        emit(now_, "trip_end", "gv:" + std::to_string(gv), {});
        reg_.report(status_report(g, now_));
        break;
      }
    }
    ++d.next_stop;
    if (d.next_stop < d.plan.stops.size()) {
      schedule_agent(ref, d.plan.stops[d.next_stop].t, EventKind::Arrival);
      return;
    }
    g.available_from =
        now_ + (stop.kind == GvStopKind::Dropoff ? params_.feasibility.service_time : 0.0);
    g.active_delivery.reset();
    if (!g.trips.empty() && g.trips.front().start < g.available_from - kTimeSlack) {
      throw ExecutionViolation("GV " + std::to_string(gv) + " late for its next task");
    }
    schedule_trip_start(gv);
  }

  const Scenario& scenario_;
  Policy policy_;
  const SimConfig& cfg_;
  const PreferenceModels* models_;
  const DispatchObserver& observer_;
  DispatchParams params_;
  Registry reg_;
  std::vector<Parcel> parcels_;
  std::vector<int> pending_;
  std::vector<Commitment> committed_;
  std::vector<long> tokens_[3];
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::optional<double> retry_at_;
  std::vector<std::string> log_;
  Metrics m_;
  double now_ = 0.0;
  double v_max_ = 1.0;
  long seq_ = 0;
  long rounds_ = 0;
};

}  // namespace

SimResult run_simulation(const Scenario& scenario, Policy policy, const SimConfig& cfg,
                         const PreferenceModels* models, std::uint64_t /*seed*/,
                         const DispatchObserver& observer) {
  Engine engine(scenario, policy, cfg, models, observer);
  return engine.run();
}

}  // namespace airground
