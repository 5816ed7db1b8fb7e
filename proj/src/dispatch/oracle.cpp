#include <cmath>
#include <limits>

#include "airground/dispatch.h"

namespace airground {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostSlack = 1e-9;

struct Search {
  const std::vector<Parcel>& parcels;
  double now;
  const DispatchParams& params;
  // best[a][mask]: cheapest summed cost of inserting parcel subset `mask`
  // into agent a over every feasible insertion order.
  std::vector<std::vector<double>> best;
  std::vector<AgentRef> agents;

  void orders(std::size_t a, Registry& reg, unsigned mask, double cost) {
    auto& slot = best[a][mask];
    slot = std::min(slot, cost);
    for (std::size_t i = 0; i < parcels.size(); ++i) {
      if (mask & (1u << i)) continue;
      PlanResult r = plan_for(reg, agents[a], parcels[i], now, params.feasibility);
      const auto* c = std::get_if<CandidatePlan>(&r);
      if (!c) continue;
      Registry next = reg;
      commit(next, parcels[i], *c);
      orders(a, next, mask | (1u << i), cost + monetized_cost(*c, params.uav_cost_rate));
    }
  }
};

}  // namespace

OracleResult brute_force_oracle(const std::vector<Parcel>& parcels, const Registry& reg,
                                double now, const DispatchParams& params) {
  if (parcels.size() > kOracleMaxParcels || reg.agent_count() > kOracleMaxAgents) {
    throw InstanceTooLarge("oracle handles at most " + std::to_string(kOracleMaxParcels) +
                           " parcels and " + std::to_string(kOracleMaxAgents) + " agents");
  }
  Search s{parcels, now, params, {}, {}};
  for (const auto& u : reg.uavs) s.agents.push_back({AgentKind::Uav, u.id});
  for (const auto& c : reg.couriers) s.agents.push_back({AgentKind::Courier, c.id});
  for (const auto& g : reg.gvs) s.agents.push_back({AgentKind::Gv, g.id});

  const std::size_t n = parcels.size();
  const std::size_t na = s.agents.size();
  s.best.assign(na, std::vector<double>(std::size_t{1} << n, kInf));
  for (std::size_t a = 0; a < na; ++a) {
    Registry copy = reg;
    s.orders(a, copy, 0u, 0.0);
  }

  // Enumerate assignment vectors lexicographically: agents in registry order,
  // then "unassigned".
  OracleResult best;
  best.cost = 0.0;
  best.count = -1;
  std::vector<int> choice(n, static_cast<int>(na));
  std::vector<unsigned> masks(na, 0u);
  auto evaluate = [&](int count) {
    double cost = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      const double c = s.best[a][masks[a]];
      if (c == kInf) return;
      cost += c;
    }
    if (count > best.count || (count == best.count && cost < best.cost - kCostSlack)) {
      best.count = count;
      best.cost = cost;
      best.assignment.assign(n, std::nullopt);
      for (std::size_t i = 0; i < n; ++i) {
        if (choice[i] < static_cast<int>(na)) best.assignment[i] = s.agents[choice[i]];
      }
    }
  };
  auto rec = [&](auto& self, std::size_t i, int count) -> void {
    if (i == n) {
      evaluate(count);
      return;
    }
    for (std::size_t a = 0; a <= na; ++a) {
      if (a < na) {
        choice[i] = static_cast<int>(a);
        masks[a] |= 1u << i;
        self(self, i + 1, count + 1);
        masks[a] &= ~(1u << i);
      } else {
        choice[i] = static_cast<int>(na);
        self(self, i + 1, count);
      }
    }
  };
  rec(rec, 0, 0);
  if (best.count < 0) {
    best.count = 0;
    best.assignment.assign(n, std::nullopt);
  }
  return best;
}

}  // namespace airground
