#include "support.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

#include "airground/dispatch.h"
#include "airground/feasibility.h"
#include "airground/preference.h"
#include "airground/random.h"

namespace airground::test_support {

namespace {

constexpr double kExtent = 6000.0;
constexpr double kNow = 36000.0;

Location point_in(Rng& rng) { return {rng.uniform(0, kExtent), rng.uniform(0, kExtent)}; }

Location near(Rng& rng, Location c, double radius) {
  for (;;) {
    const Location l{c.x + rng.uniform(-radius, radius), c.y + rng.uniform(-radius, radius)};
    if (l.x >= 0 && l.y >= 0 && l.x <= kExtent && l.y <= kExtent) return l;
  }
}

Parcel random_parcel(Rng& rng, int id, double now) {
  Parcel p;
  p.id = id;
  p.t_order = now - rng.uniform(0, 3000);
  p.pickup = point_in(rng);
  p.dropoff = near(rng, p.pickup, rng.bernoulli(0.5) ? 1500 : 4000);
  p.weight = rng.bernoulli(0.1) ? rng.uniform(1.0, 2.5) : rng.uniform(0.2, 1.0);
  return p;
}

FeasibilityConfig random_config(Rng& rng, bool zones) {
  FeasibilityConfig cfg;
  cfg.service_time = rng.bernoulli(0.3) ? 0.0 : 60.0;
  cfg.free_empty_legs = rng.bernoulli(0.2);
  if (zones && rng.bernoulli(0.25)) {
    ServiceArea area;
    area.bounds = {0, 0, kExtent, kExtent};
    area.grid_resolution = 100.0;
    const Location c{rng.uniform(1500, 4500), rng.uniform(1500, 4500)};
    const double hw = rng.uniform(200, 800);
    const double hh = rng.uniform(200, 800);
    area.no_fly_zones.push_back(
        {{{c.x - hw, c.y - hh}, {c.x + hw, c.y - hh}, {c.x + hw, c.y + hh}, {c.x - hw, c.y + hh}}});
    cfg.router = std::make_shared<const FlightRouter>(area);
  }
  return cfg;
}

std::string describe(const char* what, long attempt, const std::vector<Violation>& v) {
  std::ostringstream os;
  os << what << " at attempt " << attempt << ":";
  for (auto x : v) os << ' ' << to_string(x);
  return os.str();
}

bool physical(Violation v) { return v != Violation::Annotation; }

// Every insertion of p into the agent's current route, built without the
// planner: the route front (or the idle position) first, then each
// (pick-up, drop-off) slot pair, then a station return for UAVs.
template <class Agent>
std::vector<RoutePlan> all_insertions(const Agent& agent, const Waypoint& anchor, const Parcel& p,
                                      const std::optional<Location>& station) {
  std::vector<Waypoint> core{anchor};
  if (!agent.route.empty()) {
    std::size_t end = agent.route.waypoints.size();
    if (station) --end;  // existing station return
    for (std::size_t k = 1; k < end; ++k) core.push_back(agent.route.waypoints[k]);
  }
  Waypoint pick;
  pick.l = p.pickup;
  pick.mu = 1;
  pick.parcels = {p.id};
  Waypoint drop = pick;
  drop.l = p.dropoff;
  drop.mu = -1;
  std::vector<RoutePlan> out;
  const std::size_t m = core.size();
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) {
      RoutePlan r;
      for (std::size_t k = 0; k < m; ++k) {
        if (k == i) r.waypoints.push_back(pick);
        if (k == j) r.waypoints.push_back(drop);
        r.waypoints.push_back(core[k]);
      }
      if (i == m) r.waypoints.push_back(pick);
      if (j == m) r.waypoints.push_back(drop);
      if (station) {
        Waypoint s;
        s.l = *station;
        r.waypoints.push_back(s);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

// Moves the agent past its next waypoints as the engine would on arrival.
void advance_uav(UavState& u, Rng& rng, double& now, const FeasibilityConfig&) {
  const int steps = static_cast<int>(rng.below(3));
  for (int s = 0; s < steps && !u.route.empty(); ++s) {
    const Waypoint w = u.route.waypoints.front();
    u.route.waypoints.erase(u.route.waypoints.begin());
    now = std::max(now, w.t);
    u.location = w.l;
    if (u.route.empty()) {
      u.e_remaining = u.e_max;
      u.payload = 0.0;
      u.available_from = w.t;
      u.jobs.clear();
      break;
    }
    u.e_remaining = w.energy_after.value_or(u.e_remaining);
    u.payload = w.payload_after;
    if (w.mu == -1) {
      std::erase_if(u.jobs, [&](const Job& j) {
        return std::find(w.parcels.begin(), w.parcels.end(), j.parcel) != w.parcels.end();
      });
    }
  }
}

void advance_courier(CourierState& c, Rng& rng, double& now, const FeasibilityConfig& cfg) {
  const int steps = static_cast<int>(rng.below(3));
  for (int s = 0; s < steps && !c.route.empty(); ++s) {
    const Waypoint w = c.route.waypoints.front();
    c.route.waypoints.erase(c.route.waypoints.begin());
    now = std::max(now, w.t);
    c.location = w.l;
    c.payload = static_cast<int>(std::lround(w.payload_after));
    if (w.mu == -1) {
      std::erase_if(c.jobs, [&](const Job& j) {
        return std::find(w.parcels.begin(), w.parcels.end(), j.parcel) != w.parcels.end();
      });
    }
    if (c.route.empty()) c.available_from = w.t + cfg.service_time;
  }
}

template <class Agent, class Plan, class Check, class Anchor, class Advance>
void route_attempt(Agent& agent, Registry& reg, std::vector<Agent>& slot, Rng& rng, double now,
                   const FeasibilityConfig& cfg, const std::optional<Location>& station, Plan plan,
                   Check check, Anchor anchor_of, Advance advance, long attempt,
                   SoundnessStats& st) {
  // Pre-load the agent through its own planner and commits.
  const int preload = static_cast<int>(rng.below(4));
  for (int k = 0; k < preload; ++k) {
    Parcel q = random_parcel(rng, 100 + k, now);
    slot[0] = agent;
    const PlanResult r = plan(agent, q, now, cfg);
    if (const auto* c = std::get_if<CandidatePlan>(&r)) {
      commit(reg, q, *c);
      agent = slot[0];
    }
  }
  advance(agent, rng, now, cfg);
  Parcel p = random_parcel(rng, 7, now);
  const PlanResult r = plan(agent, p, now, cfg);
  ++st.attempts;
  if (const auto* c = std::get_if<CandidatePlan>(&r)) {
    ++st.accepted;
    const auto v = check_candidate(agent, p, now, *c, cfg);
    if (!v.empty()) {
      ++st.accepted_failures;
      if (st.first_failure.empty()) st.first_failure = describe("accepted plan flagged", attempt, v);
    }
    return;
  }
  ++st.rejected;
  const Infeasibility reason = std::get<Infeasible>(r).reason;
  bool named = false;
  const CheckOptions physical_only{false, 1e-6};
  for (const auto& route : all_insertions(agent, anchor_of(agent, now), p, station)) {
    const auto v = check(agent, job_of(p), now, route, cfg, physical_only);
    bool any = false;
    for (auto x : v) {
      if (!physical(x)) continue;
      any = true;
      if (names_constraint(x, reason)) named = true;
    }
    if (!any) {
      ++st.rejected_failures;
      if (st.first_failure.empty()) {
        st.first_failure = std::string("clean alternative for rejected plan (") +
                           to_string(reason) + ") at attempt " + std::to_string(attempt);
      }
      return;
    }
  }
  if (!named) {
    ++st.rejected_failures;
    if (st.first_failure.empty()) {
      st.first_failure = std::string("reported reason ") + to_string(reason) +
                         " not broken by any alternative at attempt " + std::to_string(attempt);
    }
  }
}

void uav_attempt(Rng& rng, long attempt, SoundnessStats& st) {
  const FeasibilityConfig cfg = random_config(rng, true);
  double now = kNow;
  Registry reg;
  UavState u;
  u.station_location = u.location = point_in(rng);
  if (cfg.router) {
    while (cfg.router->area().inside_zone(u.station_location)) {
      u.station_location = u.location = point_in(rng);
    }
  }
  u.e_max = rng.uniform(1.0e5, 7.7e5);
  u.e_remaining = u.e_max * rng.uniform(0.3, 1.0);
  u.available_from = now - rng.uniform(0, 600);
  reg.uavs.push_back(u);
  route_attempt(u, reg, reg.uavs, rng, now, cfg, u.station_location, plan_uav_insertion,
                check_uav_route, uav_anchor, advance_uav, attempt, st);
}

void courier_attempt(Rng& rng, long attempt, SoundnessStats& st) {
  const FeasibilityConfig cfg = random_config(rng, false);
  double now = kNow;
  Registry reg;
  CourierState c;
  c.location = point_in(rng);
  c.n_max = 1 + static_cast<int>(rng.below(4));
  c.available_from = now - rng.uniform(0, 600);
  reg.couriers.push_back(c);
  route_attempt(c, reg, reg.couriers, rng, now, cfg, std::nullopt, plan_courier_insertion,
                check_courier_route, courier_anchor, advance_courier, attempt, st);
}

void gv_attempt(Rng& rng, long attempt, SoundnessStats& st) {
  const FeasibilityConfig cfg = random_config(rng, false);
  const double now = kNow;
  GvState g;
  g.location = point_in(rng);
  g.available_from = now + (rng.bernoulli(0.3) ? rng.uniform(0, 600) : 0.0);
  g.occupied = rng.bernoulli(0.1);
  const int trips = static_cast<int>(rng.below(3));
  double start = now + rng.uniform(-300, 1800);
  for (int k = 0; k < trips; ++k) {
    Trip t;
    t.origin = near(rng, g.location, 2500);
    t.destination = near(rng, t.origin, 6000);
    t.start = start;
    t.end = start + manhattan_distance(t.origin, t.destination) / g.speed;
    g.trips.push_back(t);
    start = t.end + rng.uniform(0, 1500);
  }
  if (rng.bernoulli(0.05) && !g.occupied) {
    Parcel q = random_parcel(rng, 100, now);
    const PlanResult r = plan_gv_delivery(g, q, now, cfg);
    if (const auto* c = std::get_if<CandidatePlan>(&r)) {
      Registry reg;
      reg.gvs.push_back(g);
      commit(reg, q, *c);
      g = reg.gvs[0];
    }
  }
  const Parcel p = random_parcel(rng, 7, now);
  const PlanResult r = plan_gv_delivery(g, p, now, cfg);
  ++st.attempts;
  if (const auto* c = std::get_if<CandidatePlan>(&r)) {
    ++st.accepted;
    auto v = check_candidate(g, p, now, *c, cfg);
    // The cheapest feasible case is chosen.
    for (GvMode mode : {GvMode::OdPair, GvMode::Halfway, GvMode::Unoccupied}) {
      GvPlan derived;
      if (check_gv_case(g, p, now, mode, cfg, &derived).empty()) {
        const double cost = gv_cost(mode, derived.detour, derived.drop_detour, derived.drive, cfg);
        if (cost < c->cost - 1e-9) v.push_back(Violation::Annotation);
      }
    }
    if (!v.empty()) {
      ++st.accepted_failures;
      if (st.first_failure.empty()) st.first_failure = describe("accepted GV plan flagged", attempt, v);
    }
    return;
  }
  ++st.rejected;
  const Infeasibility reason = std::get<Infeasible>(r).reason;
  bool named = false;
  for (GvMode mode : {GvMode::OdPair, GvMode::Halfway, GvMode::Unoccupied}) {
    const auto v = check_gv_case(g, p, now, mode, cfg);
    if (v.empty()) {
      ++st.rejected_failures;
      if (st.first_failure.empty()) {
        st.first_failure = std::string("clean GV case ") + to_string(mode) + " for rejection (" +
                           to_string(reason) + ") at attempt " + std::to_string(attempt);
      }
      return;
    }
    for (auto x : v) named = named || names_constraint(x, reason);
  }
  if (!named) {
    ++st.rejected_failures;
    if (st.first_failure.empty()) {
      st.first_failure = std::string("GV reason ") + to_string(reason) +
                         " not broken by any case at attempt " + std::to_string(attempt);
    }
  }
}

}  // namespace

SoundnessStats run_soundness(AgentKind kind, long attempts, std::uint64_t seed) {
  SoundnessStats st;
  for (long a = 0; a < attempts; ++a) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a)));
    switch (kind) {
      case AgentKind::Uav: uav_attempt(rng, a, st); break;
      case AgentKind::Courier: courier_attempt(rng, a, st); break;
      case AgentKind::Gv: gv_attempt(rng, a, st); break;
    }
  }
  return st;
}

namespace {

// Separating-axis test for a closed axis-aligned square against a convex
// polygon; touching counts as overlap.
bool touches(const ConvexPolygon& zone, double x0, double y0, double x1, double y1) {
  const auto& v = zone.vertices;
  double px0 = v[0].x, px1 = v[0].x, py0 = v[0].y, py1 = v[0].y;
  for (const auto& q : v) {
    px0 = std::min(px0, q.x);
    px1 = std::max(px1, q.x);
    py0 = std::min(py0, q.y);
    py1 = std::max(py1, q.y);
  }
  if (px1 < x0 || px0 > x1 || py1 < y0 || py0 > y1) return false;
  const Location corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Location a = v[i];
    const Location b = v[(i + 1) % v.size()];
    const double nx = -(b.y - a.y);
    const double ny = b.x - a.x;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& q : v) {
      const double s = nx * q.x + ny * q.y;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    double clo = INFINITY, chi = -INFINITY;
    for (const auto& q : corners) {
      const double s = nx * q.x + ny * q.y;
      clo = std::min(clo, s);
      chi = std::max(chi, s);
    }
    if (chi < lo || clo > hi) return false;
  }
  return true;
}

}  // namespace

double grid_oracle_distance(const ServiceArea& area, Location a, Location b) {
  const double res = area.grid_resolution;
  const int nx = static_cast<int>(std::ceil(area.bounds.width() / res));
  const int ny = static_cast<int>(std::ceil(area.bounds.height() / res));
  std::vector<char> blocked(static_cast<std::size_t>(nx) * ny, 0);
  for (int cy = 0; cy < ny; ++cy) {
    for (int cx = 0; cx < nx; ++cx) {
      const double x0 = area.bounds.min_x + cx * res;
      const double y0 = area.bounds.min_y + cy * res;
      for (const auto& z : area.no_fly_zones) {
        if (touches(z, x0, y0, x0 + res, y0 + res)) blocked[cy * nx + cx] = 1;
      }
    }
  }
  auto cell = [&](Location p) {
    const int cx = std::min(nx - 1, static_cast<int>((p.x - area.bounds.min_x) / res));
    const int cy = std::min(ny - 1, static_cast<int>((p.y - area.bounds.min_y) / res));
    return cy * nx + cx;
  };
  const int src = cell(a);
  const int dst = cell(b);
  std::vector<double> dist(blocked.size(), INFINITY);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[src] = 0.0;
  queue.emplace(0.0, src);
  while (!queue.empty()) {
    const auto [d, c] = queue.top();
    queue.pop();
    if (d > dist[c]) continue;
    if (c == dst) return d;
    const int cx = c % nx;
    const int cy = c / nx;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int x = cx + dx;
        const int y = cy + dy;
        if (x < 0 || y < 0 || x >= nx || y >= ny || blocked[y * nx + x]) continue;
        if (dx != 0 && dy != 0 && (blocked[cy * nx + x] || blocked[y * nx + cx])) continue;
        const double nd = d + res * std::sqrt(static_cast<double>(dx * dx + dy * dy));
        if (nd < dist[y * nx + x]) {
          dist[y * nx + x] = nd;
          queue.emplace(nd, y * nx + x);
        }
      }
    }
  }
  return INFINITY;
}

namespace {

// Signs of every hidden pre-activation, used to detect a ReLU kink between
// perturbed evaluations.
std::vector<bool> relu_pattern(const Mlp& m, const Eigen::MatrixXd& x) {
  std::vector<bool> out;
  Eigen::MatrixXd a = x;
  const auto& layers = m.layers();
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    Eigen::MatrixXd z = layers[k].w * a;
    z.colwise() += layers[k].b;
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z.data()[i] > 0.0);
    a = z.cwiseMax(0.0);
  }
  return out;
}

double forward_loss(const Mlp& m, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const Eigen::VectorXd p = m.forward_batch(x);
  return bce_loss(std::vector<double>(p.data(), p.data() + p.size()), y);
}

}  // namespace

double gradient_check_draw(std::uint64_t seed, std::size_t* checked) {
  Rng rng(derive_seed(seed, 0x96ad));
  std::vector<int> dims = {static_cast<int>(kFeatureCount)};
  const int hidden = 1 + static_cast<int>(rng.below(3));
  for (int k = 0; k < hidden; ++k) dims.push_back(2 + static_cast<int>(rng.below(10)));
  dims.push_back(1);
  Mlp model = Mlp::xavier(dims, rng.next());
  for (auto& l : model.layers()) {
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = rng.uniform(-0.3, 0.3);
  }
  const int n = 1 + static_cast<int>(rng.below(16));
  Eigen::MatrixXd x(kFeatureCount, n);
  Eigen::VectorXd y(n);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < kFeatureCount; ++r) x(r, i) = rng.normal();
    labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    y(i) = labels[i];
  }
  const Gradients g = backprop_gradients(model, x, y);
  const std::vector<bool> base = relu_pattern(model, x);
  constexpr double h = 1e-4;
  double worst = 0.0;
  std::size_t count = 0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    double f[4];
    const double steps[4] = {2 * h, h, -h, -2 * h};
    bool kink = false;
    for (int s = 0; s < 4; ++s) {
      param = saved + steps[s];
      kink = kink || relu_pattern(model, x) != base;
      f[s] = forward_loss(model, x, labels);
    }
    param = saved;
    if (kink) return;
    const double numeric = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
    ++count;
  };
  auto& layers = model.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (Eigen::Index i = 0; i < layers[k].w.size(); ++i) probe(layers[k].w.data()[i], g[k].w.data()[i]);
    for (Eigen::Index i = 0; i < layers[k].b.size(); ++i) probe(layers[k].b.data()[i], g[k].b.data()[i]);
  }
  if (checked) *checked = count;
  return worst;
}

Dataset separable_toy_set(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x70e));
  Dataset out;
  while (out.size() < n) {
    LabeledSample s;
    for (auto& v : s.features) v = rng.uniform();
    const double margin = s.features[0] + s.features[1] - 1.0;
    if (std::abs(margin) < 0.1) continue;
    s.label = margin > 0 ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

}  // namespace airground::test_support
