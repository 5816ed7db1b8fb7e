#include <algorithm>
#include <cmath>

#include "airground/dispatch.h"

namespace airground {

double Thresholds::for_kind(AgentKind kind) const {
  switch (kind) {
    case AgentKind::Uav: return uav;
    case AgentKind::Courier: return courier;
    case AgentKind::Gv: return gv;
  }
  return 1.0;
}

void Thresholds::validate() const {
  for (double t : {courier, gv, uav}) {
    if (!(t > 0.0 && t < 1.0)) {
      throw std::invalid_argument("preference thresholds must lie in (0, 1)");
    }
  }
}

const Mlp& PreferenceModels::for_kind(AgentKind kind) const {
  switch (kind) {
    case AgentKind::Uav: return uav;
    case AgentKind::Courier: return courier;
    case AgentKind::Gv: return gv;
  }
  return courier;
}

bool KindSet::contains(AgentKind kind) const {
  switch (kind) {
    case AgentKind::Uav: return uav;
    case AgentKind::Courier: return courier;
    case AgentKind::Gv: return gv;
  }
  return false;
}

double monetized_cost(const CandidatePlan& c, double uav_cost_rate) {
  return c.agent.kind == AgentKind::Uav ? c.cost * uav_cost_rate : c.cost;
}

bool cheaper(const CandidatePlan& a, const CandidatePlan& b, double uav_cost_rate) {
  const double ma = monetized_cost(a, uav_cost_rate);
  const double mb = monetized_cost(b, uav_cost_rate);
  if (ma != mb) return ma < mb;
  if (a.agent.kind != b.agent.kind) return a.agent.kind < b.agent.kind;
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.added_time != b.added_time) return a.added_time < b.added_time;
  return a.agent.id < b.agent.id;
}

PlanResult plan_for(const Registry& reg, AgentRef agent, const Parcel& p,
                    double now, const FeasibilityConfig& cfg) {
  switch (agent.kind) {
    case AgentKind::Uav: return plan_uav_insertion(reg.uavs.at(agent.id), p, now, cfg);
    case AgentKind::Courier:
      return plan_courier_insertion(reg.couriers.at(agent.id), p, now, cfg);
    case AgentKind::Gv: return plan_gv_delivery(reg.gvs.at(agent.id), p, now, cfg);
  }
  return Infeasible{Infeasibility::Busy};
}

std::vector<CandidatePlan> feasible_candidates(const Registry& reg, const Parcel& p,
                                               double now, const FeasibilityConfig& cfg,
                                               KindSet kinds) {
  std::vector<CandidatePlan> out;
  auto take = [&](PlanResult r) {
    if (auto* c = std::get_if<CandidatePlan>(&r)) out.push_back(std::move(*c));
  };
  if (kinds.uav) {
    for (const auto& u : reg.uavs) take(plan_uav_insertion(u, p, now, cfg));
  }
  if (kinds.courier) {
    for (const auto& c : reg.couriers) take(plan_courier_insertion(c, p, now, cfg));
  }
  if (kinds.gv) {
    for (const auto& g : reg.gvs) take(plan_gv_delivery(g, p, now, cfg));
  }
  return out;
}

namespace {

template <class Agent>
void commit_route(Agent& agent, const Parcel& p, const CandidatePlan& plan) {
  agent.route = plan.new_route;
  if (plan.anchor_is_position && !agent.route.waypoints.empty()) {
    agent.route.waypoints.erase(agent.route.waypoints.begin());
  }
  agent.jobs.push_back(job_of(p));
}

}  // namespace

void commit(Registry& reg, const Parcel& p, const CandidatePlan& plan) {
  if (plan.parcel != p.id) throw std::logic_error("plan belongs to another parcel");
  switch (plan.agent.kind) {
    case AgentKind::Uav:
      commit_route(reg.uavs.at(plan.agent.id), p, plan);
      break;
    case AgentKind::Courier:
      commit_route(reg.couriers.at(plan.agent.id), p, plan);
      break;
    case AgentKind::Gv: {
      auto& gv = reg.gvs.at(plan.agent.id);
      if (!plan.gv_plan) throw std::logic_error("GV candidate without a plan");
      if (gv.active_delivery) throw std::logic_error("GV already carries a parcel");
      gv.active_delivery = GvDelivery{job_of(p), *plan.gv_plan, 0};
      if (plan.gv_plan->delayed_trip && !gv.trips.empty()) {
        gv.trips.front() = *plan.gv_plan->delayed_trip;
      }
      break;
    }
  }
}

std::vector<Violation> check_against(const Registry& reg, const Parcel& p,
                                     double now, const CandidatePlan& plan,
                                     const FeasibilityConfig& cfg) {
  switch (plan.agent.kind) {
    case AgentKind::Uav:
      return check_candidate(reg.uavs.at(plan.agent.id), p, now, plan, cfg);
    case AgentKind::Courier:
      return check_candidate(reg.couriers.at(plan.agent.id), p, now, plan, cfg);
    case AgentKind::Gv:
      return check_candidate(reg.gvs.at(plan.agent.id), p, now, plan, cfg);
  }
  return {};
}

FeatureVector features_of(const Registry& reg, const Parcel& p, double now,
                          const CandidatePlan& c, const DispatchParams& params) {
  FeatureContext ctx = params.features;
  ctx.uav_cost_rate = params.uav_cost_rate;
  switch (c.agent.kind) {
    case AgentKind::Uav:
      return uav_features(reg.uavs.at(c.agent.id), p, now, c, params.feasibility, ctx);
    case AgentKind::Courier:
      return courier_features(reg.couriers.at(c.agent.id), p, now, c, params.feasibility, ctx);
    case AgentKind::Gv:
      return gv_features(reg.gvs.at(c.agent.id), p, now, c, params.feasibility, ctx);
  }
  return {};
}

double preference_of(const Registry& reg, const PreferenceModels& models,
                     const Parcel& p, double now, const CandidatePlan& c,
                     const DispatchParams& params) {
  return models.for_kind(c.agent.kind).forward(features_of(reg, p, now, c, params));
}

namespace {

std::vector<const Parcel*> by_order_time(std::vector<const Parcel*> v) {
  std::sort(v.begin(), v.end(), [](const Parcel* a, const Parcel* b) {
    if (a->t_order != b->t_order) return a->t_order < b->t_order;
    return a->id < b->id;
  });
  return v;
}

AssignmentDecision decide(Registry& reg, const Parcel& p, CandidatePlan plan,
                          double now, const DispatchParams& params) {
  if (params.verify_commits) {
    const auto v = check_against(reg, p, now, plan, params.feasibility);
    if (!v.empty()) {
      throw std::logic_error("plan for parcel " + std::to_string(p.id) + " on " +
                             to_string(plan.agent) + " fails the checker: " + to_string(v.front()));
    }
  }
  AssignmentDecision d;
  d.parcel = p.id;
  d.agent = plan.agent;
  d.cost = monetized_cost(plan, params.uav_cost_rate);
  d.raw_cost = plan.cost;
  commit(reg, p, plan);
  d.plan = std::move(plan);
  return d;
}

// First candidate in `sorted` whose preference clears its kind's threshold.
// Scores are computed in chunks by kind so that the scan usually stops after
// a few network evaluations.
std::optional<std::size_t> first_preferred(const Registry& reg,
                                           const PreferenceModels& models,
                                           const Parcel& p, double now,
                                           const std::vector<CandidatePlan>& sorted,
                                           const DispatchParams& params) {
  constexpr std::size_t kChunk = 32;
  std::vector<double> rho;
  for (std::size_t start = 0; start < sorted.size(); start += kChunk) {
    const std::size_t end = std::min(sorted.size(), start + kChunk);
    rho.assign(end - start, 0.0);
    for (AgentKind kind : {AgentKind::Uav, AgentKind::Courier, AgentKind::Gv}) {
      std::vector<std::size_t> idx;
      for (std::size_t k = start; k < end; ++k) {
        if (sorted[k].agent.kind == kind) idx.push_back(k);
      }
      if (idx.empty()) continue;
      Eigen::MatrixXd x(kFeatureCount, static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const FeatureVector f = features_of(reg, p, now, sorted[idx[i]], params);
        for (std::size_t r = 0; r < kFeatureCount; ++r) x(r, i) = f[r];
      }
      const Eigen::VectorXd out = models.for_kind(kind).forward_batch(x);
      for (std::size_t i = 0; i < idx.size(); ++i) rho[idx[i] - start] = out(i);
    }
    for (std::size_t k = start; k < end; ++k) {
      if (rho[k - start] > params.thresholds.for_kind(sorted[k].agent.kind)) return k;
    }
  }
  return std::nullopt;
}

}  // namespace

StageResult preference_stage(const std::vector<const Parcel*>& pending, Registry& reg,
                             const PreferenceModels& models, double now,
                             const DispatchParams& params) {
  StageResult out;
  for (const Parcel* p : by_order_time(pending)) {
    auto cands = feasible_candidates(reg, *p, now, params.feasibility);
    std::sort(cands.begin(), cands.end(), [&](const auto& a, const auto& b) {
      return cheaper(a, b, params.uav_cost_rate);
    });
    const auto pick = first_preferred(reg, models, *p, now, cands, params);
    if (!pick) {
      out.remaining.push_back(p->id);
      continue;
    }
    out.decisions.push_back(decide(reg, *p, std::move(cands[*pick]), now, params));
  }
  return out;
}

std::vector<AssignmentDecision> greedy_gapar(const std::vector<const Parcel*>& parcels,
                                             Registry& reg, double now,
                                             const DispatchParams& params) {
  struct Entry {
    const Parcel* parcel;
    CandidatePlan plan;
  };
  std::vector<Entry> all;
  for (const Parcel* p : parcels) {
    for (auto& c : feasible_candidates(reg, *p, now, params.feasibility)) {
      all.push_back({p, std::move(c)});
    }
  }
  const double rate = params.uav_cost_rate;
  std::sort(all.begin(), all.end(), [rate](const Entry& a, const Entry& b) {
    const double ma = monetized_cost(a.plan, rate);
    const double mb = monetized_cost(b.plan, rate);
    if (ma != mb) return ma < mb;
    if (a.parcel->id != b.parcel->id) return a.parcel->id < b.parcel->id;
    return cheaper(a.plan, b.plan, rate);
  });
  std::vector<AssignmentDecision> out;
  std::vector<int> done;
  for (auto& e : all) {
    if (std::find(done.begin(), done.end(), e.parcel->id) != done.end()) continue;
    // The agent may have changed since enumeration; plan again on its snapshot.
    PlanResult r = plan_for(reg, e.plan.agent, *e.parcel, now, params.feasibility);
    auto* c = std::get_if<CandidatePlan>(&r);
    if (!c) continue;
    out.push_back(decide(reg, *e.parcel, std::move(*c), now, params));
    done.push_back(e.parcel->id);
  }
  return out;
}

std::vector<AssignmentDecision> dispatch_on_demand(const std::vector<const Parcel*>& pending,
                                                   Registry& reg, double now,
                                                   const DispatchParams& params) {
  std::vector<AssignmentDecision> out;
  for (const Parcel* p : by_order_time(pending)) {
    auto cands = feasible_candidates(reg, *p, now, params.feasibility);
    if (cands.empty()) continue;
    auto best = std::min_element(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      if (a.pickup_time != b.pickup_time) return a.pickup_time < b.pickup_time;
      return a.agent < b.agent;
    });
    out.push_back(decide(reg, *p, std::move(*best), now, params));
  }
  return out;
}

std::vector<AssignmentDecision> dispatch_cost_greedy(
    const std::vector<const Parcel*>& pending, Registry& reg, double now,
    const DispatchParams& params, KindSet kinds, const DispatchObserver& observer) {
  std::vector<AssignmentDecision> out;
  for (const Parcel* p : by_order_time(pending)) {
    auto cands = feasible_candidates(reg, *p, now, params.feasibility, kinds);
    std::optional<std::size_t> chosen;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (!chosen || cheaper(cands[k], cands[*chosen], params.uav_cost_rate)) chosen = k;
    }
    if (observer) observer(reg, *p, now, cands, chosen);
    if (!chosen) continue;
    out.push_back(decide(reg, *p, std::move(cands[*chosen]), now, params));
  }
  return out;
}

}  // namespace airground
