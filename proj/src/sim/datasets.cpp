#include <algorithm>

#include "airground/random.h"
#include "airground/sim.h"

namespace airground {

namespace {

SimConfig single_kind(const SimConfig& cfg, AgentKind kind) {
  SimConfig c = cfg;
  c.cost_greedy_kinds = KindSet::none();
  switch (kind) {
    case AgentKind::Uav: c.cost_greedy_kinds.uav = true; break;
    case AgentKind::Courier: c.cost_greedy_kinds.courier = true; break;
    case AgentKind::Gv: c.cost_greedy_kinds.gv = true; break;
  }
  c.record_log = false;
  return c;
}

DispatchParams params_for(const Scenario& scenario, const SimConfig& cfg) {
  DispatchParams p = cfg.dispatch;
  if (p.features.bounds.width() <= 0) p.features.bounds = scenario.area.bounds;
  return p;
}

template <class T>
struct Observed {
  T item;
  bool chosen = false;
};

// Subsampling, balancing, label noise and the sample cap, in that order.
template <class T, class SetLabel>
std::vector<T> finish(std::vector<Observed<T>> seen, std::uint64_t seed, const AgentDatasetConfig& data,
                      SetLabel set_label) {
  Rng rng(derive_seed(seed, 0x1abe1));
  if (data.balance_classes) {
    std::vector<std::size_t> negatives;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i].chosen) {
        ++positives;
      } else {
        negatives.push_back(i);
      }
    }
    if (negatives.size() > positives) {
      rng.shuffle(negatives);
      std::vector<char> drop(seen.size(), 0);
      for (std::size_t k = positives; k < negatives.size(); ++k) drop[negatives[k]] = 1;
      std::vector<Observed<T>> kept;
      kept.reserve(2 * positives);
      for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!drop[i]) kept.push_back(std::move(seen[i]));
      }
      seen = std::move(kept);
    }
  }
  std::vector<T> out;
  out.reserve(seen.size());
  for (auto& s : seen) {
    if (data.max_samples != 0 && out.size() >= data.max_samples) break;
    bool y = s.chosen;
    if (data.label_noise > 0.0 && rng.bernoulli(data.label_noise)) y = !y;
    set_label(s.item, y ? 1 : 0);
    out.push_back(std::move(s.item));
  }
  return out;
}

// Per-candidate negative subsampling at observation time bounds memory.
class Sampler {
 public:
  Sampler(std::uint64_t seed, double negative_keep)
      : rng_(derive_seed(seed, 0x5e1ec7)), keep_(negative_keep) {}
  bool keep(bool chosen) { return chosen || keep_ >= 1.0 || rng_.bernoulli(keep_); }

 private:
  Rng rng_;
  double keep_;
};

}  // namespace

Dataset simulate_agent_dataset(AgentKind kind, const Scenario& scenario, const SimConfig& cfg,
                               std::uint64_t seed, const AgentDatasetConfig& data) {
  const SimConfig c = single_kind(cfg, kind);
  const DispatchParams params = params_for(scenario, c);
  Sampler sampler(seed, data.negative_keep);
  std::vector<Observed<LabeledSample>> seen;
  DispatchObserver observer = [&](const Registry& reg, const Parcel& p, double now,
                                  const std::vector<CandidatePlan>& candidates,
                                  std::optional<std::size_t> chosen) {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const bool y = chosen && *chosen == k;
      if (!sampler.keep(y)) continue;
      seen.push_back({{features_of(reg, p, now, candidates[k], params), 0}, y});
    }
  };
  run_simulation(scenario, Policy::CostGreedy, c, nullptr, seed, observer);
  return finish(std::move(seen), seed, data, [](LabeledSample& s, int y) { s.label = y; });
}

std::vector<CourierLogRecord> simulate_courier_log(const Scenario& scenario, const SimConfig& cfg,
                                                   std::uint64_t seed,
                                                   const AgentDatasetConfig& data) {
  const SimConfig c = single_kind(cfg, AgentKind::Courier);
  const double deadline = c.dispatch.feasibility.deadline;
  Sampler sampler(seed, data.negative_keep);
  std::vector<Observed<CourierLogRecord>> seen;
  DispatchObserver observer = [&](const Registry& reg, const Parcel& p, double now,
                                  const std::vector<CandidatePlan>& candidates,
                                  std::optional<std::size_t> chosen) {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const CandidatePlan& cand = candidates[k];
      const bool y = chosen && *chosen == k;
      if (cand.agent.kind != AgentKind::Courier || !sampler.keep(y)) continue;
      const CourierState& courier = reg.couriers.at(cand.agent.id);
      CourierLogRecord r;
      r.t_order = p.t_order;
      r.x = p.pickup.x;
      r.y = p.pickup.y;
      r.detour_km = cand.detour / 1000.0;
      r.speed = courier.speed;
      r.dist_km = manhattan_distance(p.pickup, p.dropoff) / 1000.0;
      r.cost = cand.cost;
      r.payload = static_cast<double>(courier.jobs.size());
      r.n_max = courier.n_max;
      r.t_re = courier.jobs.empty() ? 0.0 : std::max(0.0, courier.jobs.back().t_order + deadline - now);
      seen.push_back({r, y});
    }
  };
  run_simulation(scenario, Policy::CostGreedy, c, nullptr, seed, observer);
  return finish(std::move(seen), seed, data, [](CourierLogRecord& r, int y) { r.accepted = y; });
}

}  // namespace airground
