#include "airground/instances.h"
#include "airground/random.h"

namespace airground {

namespace {

Location point_in(Rng& rng, double extent) { return {rng.uniform(0, extent), rng.uniform(0, extent)}; }

Location near(Rng& rng, Location c, double radius, double extent) {
  for (;;) {
    const Location l{c.x + rng.uniform(-radius, radius), c.y + rng.uniform(-radius, radius)};
    if (l.x >= 0 && l.y >= 0 && l.x <= extent && l.y <= extent) return l;
  }
}

}  // namespace

std::vector<const Parcel*> pointers(const std::vector<Parcel>& parcels) {
  std::vector<const Parcel*> out;
  for (const auto& p : parcels) out.push_back(&p);
  return out;
}

SmallInstance random_instance(std::uint64_t seed, const InstanceShape& shape) {
  Rng rng(derive_seed(seed, 0x5a11));
  SmallInstance inst;
  inst.now = 36000.0;
  inst.params.features.bounds = {0, 0, shape.extent, shape.extent};
  const double ext = shape.extent;

  const std::size_t n_parcels = shape.min_parcels + rng.below(shape.max_parcels - shape.min_parcels + 1);
  for (std::size_t i = 0; i < n_parcels; ++i) {
    Parcel p;
    p.id = static_cast<int>(i);
    p.t_order = inst.now - rng.uniform(0, 900);
    p.pickup = point_in(rng, ext);
    p.dropoff = near(rng, p.pickup, 1500, ext);
    p.weight = rng.uniform(0.2, 1.0);
    inst.parcels.push_back(p);
  }

  const std::size_t n_agents = shape.min_agents + rng.below(shape.max_agents - shape.min_agents + 1);
  Registry& reg = inst.registry;
  for (std::size_t a = 0; a < n_agents; ++a) {
    switch (rng.below(3)) {
      case 0: {
        UavState u;
        u.id = static_cast<int>(reg.uavs.size());
        u.station_location = u.location = point_in(rng, ext);
        // Enough charge for a few sorties at most.
        u.e_max = u.e_remaining = rng.uniform(2.0e5, 7.7e5);
        u.payload_cap = 2.5;
        u.available_from = inst.now;
        reg.uavs.push_back(u);
        break;
      }
      case 1: {
        CourierState c;
        c.id = static_cast<int>(reg.couriers.size());
        c.location = point_in(rng, ext);
        c.n_max = 1 + static_cast<int>(rng.below(3));
        c.available_from = inst.now;
        reg.couriers.push_back(c);
        break;
      }
      default: {
        GvState g;
        g.id = static_cast<int>(reg.gvs.size());
        g.location = point_in(rng, ext);
        g.available_from = inst.now;
        if (rng.bernoulli(0.6)) {
          Trip t;
          t.origin = near(rng, g.location, 1500, ext);
          t.destination = point_in(rng, ext);
          t.start = inst.now + rng.uniform(300, 1200);
          t.end = t.start + manhattan_distance(t.origin, t.destination) / g.speed + 60;
          g.trips.push_back(t);
        }
        reg.gvs.push_back(g);
        break;
      }
    }
  }
  return inst;
}

SmallInstance single_feasible_instance(std::uint64_t seed, std::size_t count) {
  Rng rng(derive_seed(seed, 0x51f));
  SmallInstance inst;
  inst.now = 36000.0;
  // Couriers 30 km apart cannot reach each other's parcels within the deadline.
  const double spacing = 30000.0;
  inst.params.features.bounds = {0, 0, spacing * static_cast<double>(count), 2000};
  for (std::size_t i = 0; i < count; ++i) {
    CourierState c;
    c.id = static_cast<int>(i);
    c.location = {spacing * static_cast<double>(i) + rng.uniform(0, 1000), rng.uniform(0, 2000)};
    c.available_from = inst.now;
    inst.registry.couriers.push_back(c);
  }
  std::vector<std::size_t> owner(count);
  for (std::size_t i = 0; i < count; ++i) owner[i] = i;
  rng.shuffle(owner);
  for (std::size_t i = 0; i < count; ++i) {
    const double base = spacing * static_cast<double>(owner[i]);
    Parcel p;
    p.id = static_cast<int>(i);
    p.t_order = inst.now - rng.uniform(0, 300);
    p.pickup = {base + rng.uniform(0, 1000), rng.uniform(0, 2000)};
    p.dropoff = {base + rng.uniform(0, 1000), rng.uniform(0, 2000)};
    inst.parcels.push_back(p);
  }
  return inst;
}

}  // namespace airground
