#include <algorithm>
#include <cmath>

#include "airground/preference.h"

namespace airground {

namespace {

constexpr double kDay = 86400.0;

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Shared normalisation for live candidates and logged records.
FeatureVector assemble(double t_order, Location pickup, double detour_km,
                       double speed, double dist_km, double cost,
                       double load_fraction, double t_re, double deadline,
                       const FeatureContext& ctx) {
  const Rect& r = ctx.bounds;
  const double day = std::fmod(t_order, kDay);
  FeatureVector f;
  f[0] = (day < 0 ? day + kDay : day) / kDay;
  f[1] = r.width() > 0 ? unit((pickup.x - r.min_x) / r.width()) : 0.0;
  f[2] = r.height() > 0 ? unit((pickup.y - r.min_y) / r.height()) : 0.0;
  f[3] = detour_km;
  f[4] = speed;
  f[5] = dist_km;
  f[6] = cost;
  f[7] = unit(load_fraction);
  f[8] = deadline > 0 ? unit(t_re / deadline) : 0.0;
  return f;
}

}  // namespace

FeatureVector courier_features(const CourierState& courier, const Parcel& p,
                               double now, const CandidatePlan& c,
                               const FeasibilityConfig& cfg,
                               const FeatureContext& ctx) {
  // Remaining time of the most recently accepted parcel.
  double t_re = 0.0;
  if (!courier.jobs.empty()) {
    t_re = std::max(0.0, courier.jobs.back().t_order + cfg.deadline - now);
  }
  const double load = courier.n_max > 0
                          ? static_cast<double>(courier.jobs.size()) / courier.n_max
                          : 1.0;
  return assemble(p.t_order, p.pickup, c.detour / 1000.0, courier.speed,
                  manhattan_distance(p.pickup, p.dropoff) / 1000.0, c.cost,
                  load, t_re, cfg.deadline, ctx);
}

FeatureVector gv_features(const GvState& gv, const Parcel& p, double now,
                          const CandidatePlan& c, const FeasibilityConfig& cfg,
                          const FeatureContext& ctx) {
  double load = 0.0;
  double t_re = 0.0;
  if (c.gv_plan && c.gv_plan->original_trip) {
    load = 1.0;
    t_re = std::max(0.0, c.gv_plan->original_trip->end - now);
  }
  return assemble(p.t_order, p.pickup, c.detour / 1000.0, gv.speed,
                  manhattan_distance(p.pickup, p.dropoff) / 1000.0, c.cost,
                  load, t_re, cfg.deadline, ctx);
}

FeatureVector uav_features(const UavState& uav, const Parcel& p, double now,
                           const CandidatePlan& c, const FeasibilityConfig& cfg,
                           const FeatureContext& ctx) {
  double carried = 0.0;
  for (const auto& job : uav.jobs) carried += job.weight;
  const Waypoint anchor = uav_anchor(uav, now);
  const double energy = anchor.energy_after.value_or(uav.e_remaining);
  const double t_re =
      std::max(0.0, energy) / power_rate(std::max(0.0, anchor.payload_after), cfg.energy);
  const double load = uav.payload_cap > 0 ? carried / uav.payload_cap : 1.0;
  return assemble(p.t_order, p.pickup, c.detour / 1000.0, uav.speed,
                  cfg.flight(p.pickup, p.dropoff) / 1000.0,
                  c.cost * ctx.uav_cost_rate, load, t_re, cfg.deadline, ctx);
}

Dataset extract_courier_dataset(const std::vector<CourierLogRecord>& log,
                                const FeatureContext& ctx, double deadline) {
  Dataset out;
  out.reserve(log.size());
  std::size_t row = 0;
  for (const auto& r : log) {
    ++row;
    const double fields[] = {r.t_order, r.x,    r.y,     r.detour_km, r.speed,
                             r.dist_km, r.cost, r.payload, r.n_max,   r.t_re};
    for (double v : fields) {
      if (!std::isfinite(v)) {
        throw MalformedRecord("courier log record " + std::to_string(row) +
                              " has a missing or non-finite field");
      }
    }
    if (r.n_max <= 0 || r.speed <= 0 || (r.accepted != 0 && r.accepted != 1)) {
      throw MalformedRecord("courier log record " + std::to_string(row) +
                            " is out of range");
    }
    LabeledSample s;
    s.features = assemble(r.t_order, {r.x, r.y}, r.detour_km, r.speed, r.dist_km,
                          r.cost, r.payload / r.n_max, r.t_re, deadline, ctx);
    s.label = r.accepted;
    out.push_back(s);
  }
  return out;
}

double predict_preference(const Mlp& model, const CourierState& courier,
                          const Parcel& p, double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx) {
  return model.forward(courier_features(courier, p, now, c, cfg, ctx));
}

double predict_preference(const Mlp& model, const GvState& gv, const Parcel& p,
                          double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx) {
  return model.forward(gv_features(gv, p, now, c, cfg, ctx));
}

double predict_preference(const Mlp& model, const UavState& uav, const Parcel& p,
                          double now, const CandidatePlan& c,
                          const FeasibilityConfig& cfg, const FeatureContext& ctx) {
  return model.forward(uav_features(uav, p, now, c, cfg, ctx));
}

}  // namespace airground
