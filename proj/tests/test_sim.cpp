#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "airground/sim.h"

using namespace airground;

namespace {

Scenario empty_scenario() {
  Scenario s;
  s.area.bounds = {0, 0, 10000, 10000};
  s.uavs_per_station = 0;
  s.couriers_per_station = 0;
  return s;
}

Parcel order_at(int id, double t, Location pickup, Location dropoff) {
  Parcel p;
  p.id = id;
  p.t_order = t;
  p.pickup = pickup;
  p.dropoff = dropoff;
  p.weight = 0.5;
  return p;
}

GvState idle_gv(int id, Location l) {
  GvState g;
  g.id = id;
  g.location = l;
  return g;
}

ScenarioConfig small_config(std::uint64_t seed) {
  ScenarioConfig c;
  c.base_orders = 150;
  c.fleet_size = 200;
  c.taxi_ratio = 0.1;
  c.uav_stations = 2;
  c.uavs_per_station = 3;
  c.courier_stations = 4;
  c.couriers_per_station = 2;
  c.area_width = c.area_height = 8000;
  c.seed = seed;
  return c;
}

std::map<std::string, int> count_kind(const std::vector<std::string>& log, const std::string& kind) {
  std::map<std::string, int> n;
  for (const auto& l : log) {
    const auto a = l.find('\t');
    const auto b = l.find('\t', a + 1);
    if (l.substr(a + 1, b - a - 1) != kind) continue;
    const auto c = l.find('\t', b + 1);
    ++n[l.substr(b + 1, c - b - 1)];
  }
  return n;
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].features != b[k].features || a[k].label != b[k].label) return false;
  }
  return true;
}

}  // namespace

TEST(Policy, Names) {
  for (Policy p : {Policy::TwoStage, Policy::CostGreedy, Policy::OnDemand, Policy::UavTaxi}) {
    EXPECT_EQ(policy_from_string(to_string(p)), p);
  }
  EXPECT_THROW(policy_from_string("tri"), std::invalid_argument);
}

TEST(Simulation, SingleCourierHandTrace) {
  // Station at the origin, pick-up 1 km east, drop-off 2 km north of it.
  Scenario s = empty_scenario();
  s.courier_stations = {{0, 0}};
  s.couriers_per_station = 1;
  const double t0 = s.horizon_start + 100;
  s.parcels = {order_at(0, t0, {1000, 0}, {1000, 2000})};
  const SimResult r = run_simulation(s, Policy::CostGreedy, SimConfig{});
  EXPECT_EQ(r.metrics.ordered, 1);
  EXPECT_EQ(r.metrics.delivered, 1);
  EXPECT_EQ(r.metrics.delivered_courier, 1);
  // 200 s to the pick-up, 60 s service, 400 s to the drop-off.
  ASSERT_EQ(r.metrics.delivery_minutes.size(), 1u);
  EXPECT_NEAR(r.metrics.delivery_minutes[0], 660.0 / 60.0, 1e-9);
  EXPECT_NEAR(r.metrics.courier_cost, 6.30, 1e-12);
  EXPECT_NEAR(r.metrics.total_cost, 6.30, 1e-12);
  EXPECT_DOUBLE_EQ(r.metrics.courier_share, 100.0);
  EXPECT_FALSE(r.metrics.taxi_price.has_value());
  ASSERT_TRUE(r.parcels[0].delivered_at.has_value());
  EXPECT_NEAR(*r.parcels[0].delivered_at, t0 + 660, 1e-9);
  EXPECT_EQ(r.registry.couriers[0].location, (Location{1000, 2000}));
  EXPECT_EQ(r.registry.couriers[0].payload, 0);
}

TEST(Simulation, NoAgentsEverythingFails) {
  Scenario s = empty_scenario();
  for (int i = 0; i < 5; ++i) {
    s.parcels.push_back(order_at(i, s.horizon_start + 600 * i, {1000, 1000}, {2000, 1000}));
  }
  const SimResult r = run_simulation(s, Policy::CostGreedy, SimConfig{});
  EXPECT_EQ(r.metrics.ordered, 5);
  EXPECT_EQ(r.metrics.failed, 5);
  EXPECT_EQ(r.metrics.delivered, 0);
  EXPECT_EQ(r.metrics.pending, 0);
  EXPECT_EQ(r.metrics.total_cost, 0.0);
}

TEST(Simulation, TwoStageNeedsModels) {
  Scenario s = empty_scenario();
  EXPECT_THROW(run_simulation(s, Policy::TwoStage, SimConfig{}), std::invalid_argument);
}

TEST(Metrics, TaxiPriceIsMeanGvCost) {
  const std::vector<std::string> log = {
      "100\torder\tparcel:0",
      "100\torder\tparcel:1",
      "110\tassign\tparcel:0\tagent=gv:0\tcost=8.0999999999999996\traw=8.0999999999999996",
      "120\tassign\tparcel:1\tagent=gv:1\tcost=7.5599999999999996\traw=7.5599999999999996",
      "500\tpickup\tparcel:0\tagent=gv:0",
      "700\tdeliver\tparcel:0\tagent=gv:0\tt_order=100\traw=8.0999999999999996",
      "1300\tdeliver\tparcel:1\tagent=gv:1\tt_order=100\traw=7.5599999999999996",
      "1400\tend\tsim\tpending=0",
  };
  const Metrics m = collect_metrics(log);
  EXPECT_EQ(m.delivered_gv, 2);
  ASSERT_TRUE(m.taxi_price.has_value());
  EXPECT_NEAR(*m.taxi_price, 7.83, 1e-12);
  EXPECT_NEAR(m.mean_delivery_minutes, 15.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.gv_share, 100.0);
}

TEST(Metrics, EmptyLog) {
  const Metrics m = collect_metrics({});
  EXPECT_EQ(m.ordered, 0);
  EXPECT_FALSE(m.taxi_price.has_value());
  EXPECT_EQ(m.mean_delivery_minutes, 0.0);
  EXPECT_EQ(m.courier_share, 0.0);
}

TEST(Metrics, CorruptLogs) {
  const std::vector<std::vector<std::string>> bad = {
      {"10\torder\tparcel:0", "5\torder\tparcel:1"},                          // time runs backwards
      {"10\tdeliver\tparcel:0\tagent=uav:0\tt_order=1\traw=3"},                // never assigned
      {"10\torder\tparcel:0", "10\torder\tparcel:0"},                          // ordered twice
      {"x\torder\tparcel:0"},                                                  // bad time
      {"10\torder"},                                                           // missing entity
      {"10\tteleport\tparcel:0"},                                              // unknown kind
      {"10\torder\tparcel:0", "11\tassign\tparcel:0\tagent=uav:0\tcost=0\traw=1",
       "12\tdeliver\tparcel:0\tagent=uav:0\traw=1"},                           // missing t_order
      {"10\torder\tparcel:0", "11\tassign\tparcel:0\tagent=truck:0\tcost=0\traw=1",
       "12\tdeliver\tparcel:0\tagent=truck:0\tt_order=10\traw=1"},             // bad agent
      {"10\torder\tparcel:a"},                                                 // bad id
      {"10\torder\tparcel:0\tnoequals"},                                       // bad field
      {"10\tfail\tparcel:3"},                                                  // unknown parcel
  };
  for (std::size_t k = 0; k < bad.size(); ++k) {
    EXPECT_THROW(collect_metrics(bad[k]), CorruptLog) << "case " << k;
  }
}

TEST(Metrics, FinalizeShares) {
  Metrics m;
  m.courier_cost = 30;
  m.gv_cost = 10;
  m.delivered_gv = 4;
  m.delivery_minutes = {10, 20};
  finalize_metrics(m);
  EXPECT_EQ(m.total_cost, 40);
  EXPECT_DOUBLE_EQ(m.courier_share, 75);
  EXPECT_DOUBLE_EQ(m.gv_share, 25);
  EXPECT_DOUBLE_EQ(*m.taxi_price, 2.5);
  EXPECT_DOUBLE_EQ(m.mean_delivery_minutes, 15);
}

class PolicyRuns : public ::testing::TestWithParam<Policy> {};

TEST_P(PolicyRuns, InvariantsOnSyntheticDays) {
  const PreferenceModels models{Mlp::xavier(default_shared_dims(), 1),
                                Mlp::xavier(default_shared_dims(), 2),
                                Mlp::xavier(default_shared_dims(), 3)};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Scenario s = synth_scenario(small_config(seed));
    const SimResult r = run_simulation(s, GetParam(), SimConfig{}, &models, seed);
    const Metrics& m = r.metrics;
    // Parcel conservation.
    EXPECT_EQ(m.ordered, static_cast<long>(s.parcels.size()));
    EXPECT_EQ(m.ordered, m.delivered + m.failed + m.pending);
    EXPECT_EQ(m.delivered, m.delivered_uav + m.delivered_courier + m.delivered_gv);
    EXPECT_GT(m.delivered, 0);
    // Every delivery within the deadline.
    for (double t : m.delivery_minutes) EXPECT_LE(t, 60.0 + 1e-6);
    // At most one assignment per parcel; every delivery is by its assignee.
    for (const auto& [entity, n] : count_kind(r.log, "assign")) EXPECT_EQ(n, 1) << entity;
    for (const auto& [entity, n] : count_kind(r.log, "deliver")) EXPECT_EQ(n, 1) << entity;
    for (const auto& p : r.parcels) {
      if (p.state == ParcelState::Delivered) {
        EXPECT_TRUE(p.assigned_to.has_value());
      }
    }
    // Both accounting paths agree.
    EXPECT_EQ(collect_metrics(r.log), m);
    if (GetParam() == Policy::UavTaxi) {
      EXPECT_EQ(m.delivered_courier, 0);
    }
  }
}

TEST_P(PolicyRuns, RerunIsIdentical) {
  const PreferenceModels models{Mlp::xavier(default_shared_dims(), 1),
                                Mlp::xavier(default_shared_dims(), 2),
                                Mlp::xavier(default_shared_dims(), 3)};
  const Scenario s = synth_scenario(small_config(11));
  const SimResult a = run_simulation(s, GetParam(), SimConfig{}, &models, 4);
  const SimResult b = run_simulation(s, GetParam(), SimConfig{}, &models, 4);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.metrics, b.metrics);
}

INSTANTIATE_TEST_SUITE_P(All, PolicyRuns,
                         ::testing::Values(Policy::TwoStage, Policy::CostGreedy, Policy::OnDemand,
                                           Policy::UavTaxi),
                         [](const auto& info) {
                           std::string n = to_string(info.param);
                           n.erase(std::remove(n.begin(), n.end(), '-'), n.end());
                           return n;
                         });

TEST(Simulation, LogCanBeSwitchedOff) {
  const Scenario s = synth_scenario(small_config(2));
  SimConfig cfg;
  cfg.record_log = false;
  const SimResult quiet = run_simulation(s, Policy::CostGreedy, cfg);
  const SimResult loud = run_simulation(s, Policy::CostGreedy, SimConfig{});
  EXPECT_TRUE(quiet.log.empty());
  EXPECT_EQ(quiet.metrics, loud.metrics);
}

TEST(AgentDataset, SingleGvIsChosen) {
  Scenario s = empty_scenario();
  s.gvs = {idle_gv(0, {4000, 0})};
  s.parcels = {order_at(0, s.horizon_start + 10, {5000, 0}, {6000, 0})};
  const Dataset d = simulate_agent_dataset(AgentKind::Gv, s, SimConfig{}, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].label, 1);
}

TEST(AgentDataset, CheaperGvIsLabelledPositive) {
  // Unoccupied runs of 5 and 9 CNY at 2.7 CNY/km.
  Scenario s = empty_scenario();
  s.gvs = {idle_gv(0, {5000 - (5000.0 / 2.7 - 1000), 0}), idle_gv(1, {5000 - (9000.0 / 2.7 - 1000), 0})};
  s.parcels = {order_at(0, s.horizon_start + 10, {5000, 0}, {6000, 0})};
  const Dataset d = simulate_agent_dataset(AgentKind::Gv, s, SimConfig{}, 1);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].label, 1);
  EXPECT_EQ(d[1].label, 0);
  // Cost slot.
  EXPECT_NEAR(d[0].features[6], 5.0, 1e-9);
  EXPECT_NEAR(d[1].features[6], 9.0, 1e-9);
  // Kinds outside the replay contribute nothing.
  EXPECT_TRUE(simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 1).empty());
}

TEST(AgentDataset, BalancingAndNoise) {
  const Scenario s = synth_scenario(small_config(5));
  AgentDatasetConfig bal;
  bal.balance_classes = true;
  const Dataset d = simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 3, bal);
  std::size_t pos = 0;
  for (const auto& x : d) pos += x.label;
  ASSERT_GT(pos, 0u);
  EXPECT_EQ(d.size(), 2 * pos);
  EXPECT_TRUE(same_dataset(d, simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 3, bal)));

  AgentDatasetConfig capped;
  capped.max_samples = 7;
  EXPECT_EQ(simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 3, capped).size(), 7u);

  AgentDatasetConfig flip;
  flip.label_noise = 1.0;
  const Dataset plain = simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 3);
  const Dataset flipped = simulate_agent_dataset(AgentKind::Courier, s, SimConfig{}, 3, flip);
  ASSERT_EQ(plain.size(), flipped.size());
  for (std::size_t k = 0; k < plain.size(); ++k) EXPECT_EQ(plain[k].label, 1 - flipped[k].label);
}

TEST(AgentDataset, CourierLogMatchesReplay) {
  const Scenario s = synth_scenario(small_config(6));
  const auto log = simulate_courier_log(s, SimConfig{}, 2);
  ASSERT_FALSE(log.empty());
  long accepted = 0;
  for (const auto& r : log) {
    accepted += r.accepted;
    EXPECT_EQ(r.n_max, 5);
    EXPECT_EQ(r.speed, 5.0);
    EXPECT_GE(r.cost, 0.0);
  }
  SimConfig only;
  only.cost_greedy_kinds = {false, true, false};
  const SimResult run = run_simulation(s, Policy::CostGreedy, only);
  long assigned = 0;
  for (const auto& [e, n] : count_kind(run.log, "assign")) assigned += n;
  EXPECT_EQ(accepted, assigned);
}
