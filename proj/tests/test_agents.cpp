#include <gtest/gtest.h>

#include "airground/agents.h"

using namespace airground;

namespace {

Waypoint wp(Location l, int mu, std::vector<int> parcels, double payload_after = 0.0) {
  Waypoint w;
  w.l = l;
  w.mu = mu;
  w.parcels = std::move(parcels);
  w.payload_after = payload_after;
  return w;
}

}  // namespace

TEST(Parcel, AllowedTransitions) {
  Parcel p;
  p.t_order = 100;
  EXPECT_EQ(p.state, ParcelState::Pending);
  p.assign({AgentKind::Courier, 3});
  EXPECT_EQ(p.state, ParcelState::Assigned);
  ASSERT_TRUE(p.assigned_to.has_value());
  EXPECT_EQ(*p.assigned_to, (AgentRef{AgentKind::Courier, 3}));
  p.deliver(400);
  EXPECT_EQ(p.state, ParcelState::Delivered);
  EXPECT_EQ(p.delivery_time(), 300.0);

  Parcel q;
  q.fail();
  EXPECT_EQ(q.state, ParcelState::Failed);
  EXPECT_FALSE(q.delivery_time().has_value());
}

TEST(Parcel, ForbiddenTransitionsThrow) {
  Parcel p;
  EXPECT_THROW(p.deliver(10), std::logic_error);
  p.assign({AgentKind::Uav, 0});
  EXPECT_THROW(p.assign({AgentKind::Uav, 1}), std::logic_error);
  EXPECT_THROW(p.fail(), std::logic_error);
  p.deliver(10);
  EXPECT_THROW(p.deliver(11), std::logic_error);
  EXPECT_THROW(p.fail(), std::logic_error);

  Parcel q;
  q.fail();
  EXPECT_THROW(q.assign({AgentKind::Gv, 0}), std::logic_error);
  EXPECT_THROW(q.fail(), std::logic_error);
}

TEST(Parcel, DeliveryBeforeOrderIsRejected) {
  Parcel p;
  p.t_order = 500;
  p.assign({AgentKind::Uav, 0});
  EXPECT_THROW(p.deliver(499), std::logic_error);
}

TEST(AgentRef, OrderingAndNames) {
  EXPECT_LT((AgentRef{AgentKind::Uav, 9}), (AgentRef{AgentKind::Courier, 0}));
  EXPECT_LT((AgentRef{AgentKind::Courier, 9}), (AgentRef{AgentKind::Gv, 0}));
  EXPECT_EQ(to_string(AgentRef{AgentKind::Gv, 12}), "gv:12");
  EXPECT_EQ(agent_kind_from_string("courier"), AgentKind::Courier);
  EXPECT_THROW(agent_kind_from_string("truck"), std::invalid_argument);
}

TEST(StatusReport, CourierCarriesPayloadCount) {
  CourierState c;
  c.id = 4;
  c.location = {10, 20};
  c.payload = 2;  // arrived at a drop-off with two parcels left
  c.route.waypoints.push_back(wp({30, 20}, -1, {1}, 1));
  const StatusRecord r = status_report(c, 900);
  EXPECT_EQ(r.agent, (AgentRef{AgentKind::Courier, 4}));
  EXPECT_EQ(r.t, 900);
  EXPECT_EQ(r.location, (Location{10, 20}));
  EXPECT_EQ(r.payload, 2.0);
  EXPECT_FALSE(r.energy.has_value());
  EXPECT_FALSE(r.occupied.has_value());
}

TEST(StatusReport, GvStartingTripIsOccupied) {
  GvState g;
  g.id = 1;
  g.occupied = true;
  g.trips.push_back({{0, 0}, {100, 0}, 50, 80});
  const StatusRecord r = status_report(g, 50);
  EXPECT_EQ(r.occupied, true);
  EXPECT_EQ(r.progress, "trip");
}

TEST(StatusReport, UavCarriesEnergy) {
  UavState u;
  u.e_remaining = 0.4 * u.e_max;
  const StatusRecord r = status_report(u, 1);
  ASSERT_TRUE(r.energy.has_value());
  EXPECT_DOUBLE_EQ(*r.energy, 0.4 * u.e_max);
  EXPECT_EQ(r.progress, "idle");
}

TEST(Routes, PickupsMatchDropoffs) {
  RoutePlan r;
  r.waypoints = {wp({0, 0}, 0, {}), wp({1, 0}, 1, {1, 2}, 2), wp({2, 0}, 1, {3}, 3),
                 wp({3, 0}, -1, {1, 2, 3}, 0)};
  EXPECT_TRUE(pickups_match_dropoffs(r));

  RoutePlan missing = r;
  missing.waypoints.back().parcels = {1, 2};
  EXPECT_FALSE(pickups_match_dropoffs(missing));

  RoutePlan early;
  early.waypoints = {wp({0, 0}, 0, {}), wp({1, 0}, -1, {1}), wp({2, 0}, 1, {1})};
  EXPECT_FALSE(pickups_match_dropoffs(early));

  RoutePlan twice;
  twice.waypoints = {wp({0, 0}, 0, {}), wp({1, 0}, 1, {1}), wp({2, 0}, -1, {1}),
                     wp({3, 0}, -1, {1})};
  EXPECT_FALSE(pickups_match_dropoffs(twice));

  // Parcels already on board need only a drop-off.
  RoutePlan onboard;
  onboard.waypoints = {wp({0, 0}, 0, {}), wp({1, 0}, -1, {5})};
  EXPECT_TRUE(pickups_match_dropoffs(onboard, {5}));
  EXPECT_FALSE(pickups_match_dropoffs(onboard));
}

TEST(Routes, CourierPayloadRecurrence) {
  // Pick-ups of two and one parcels, then one drop-off of all three.
  const std::vector<Waypoint> w = {wp({0, 0}, 1, {1, 2}), wp({1, 0}, 1, {3}), wp({2, 0}, -1, {1, 2, 3})};
  std::vector<double> profile;
  double n = 0;
  for (const auto& x : w) {
    n += x.mu * static_cast<double>(x.parcels.size());
    profile.push_back(n);
  }
  EXPECT_EQ(profile, (std::vector<double>{2, 3, 0}));
}

TEST(Agents, JobOfCopiesParcel) {
  Parcel p;
  p.id = 8;
  p.t_order = 5;
  p.weight = 0.7;
  p.pickup = {1, 2};
  p.dropoff = {3, 4};
  const Job j = job_of(p);
  EXPECT_EQ(j.parcel, 8);
  EXPECT_EQ(j.t_order, 5);
  EXPECT_EQ(j.weight, 0.7);
  EXPECT_EQ(j.pickup, p.pickup);
  EXPECT_EQ(j.dropoff, p.dropoff);
}
