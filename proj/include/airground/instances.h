#pragma once

#include <cstdint>
#include <vector>

#include "airground/dispatch.h"

namespace airground {

// A small seeded dispatch instance within the exhaustive oracle's limits.
struct SmallInstance {
  std::vector<Parcel> parcels;  // ids equal indices
  Registry registry;
  double now = 0.0;
  DispatchParams params;
};

struct InstanceShape {
  std::size_t min_parcels = 3;
  std::size_t max_parcels = kOracleMaxParcels;
  std::size_t min_agents = 2;
  std::size_t max_agents = kOracleMaxAgents;
  double extent = 4000.0;  // side of the square area, meters
};

// Mixed fleet with tight capacities, reduced UAV batteries and GVs that may
// have an upcoming trip, so that assignments interact.
SmallInstance random_instance(std::uint64_t seed, const InstanceShape& shape = {});

// `count` couriers far apart, each the only feasible agent of exactly one
// parcel.
SmallInstance single_feasible_instance(std::uint64_t seed, std::size_t count);

std::vector<const Parcel*> pointers(const std::vector<Parcel>& parcels);

}  // namespace airground
