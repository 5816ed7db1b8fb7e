#pragma once

#include <cstdint>
#include <string>

#include "airground/agents.h"
#include "airground/geo.h"
#include "airground/preference.h"

namespace airground::test_support {

// Randomised insertion attempts against the independent checker.
struct SoundnessStats {
  long attempts = 0;
  long accepted = 0;
  long rejected = 0;
  long accepted_failures = 0;  // accepted plan flagged by the checker
  long rejected_failures = 0;  // rejection with a clean alternative, or an unnamed reason
  std::string first_failure;
};

// Each attempt builds a fresh agent of `kind`, commits up to three random
// parcels to it and then plans one more. Accepted plans must re-verify
// cleanly; for a rejection, every insertion position (every GV case) must
// break a limit and one of them must break the reported one.
SoundnessStats run_soundness(AgentKind kind, long attempts, std::uint64_t seed);

// Dijkstra over the full 8-connected cell grid of `area`, with the blocking
// rule recomputed from the zone geometry: shortest path between the centres
// of the cells containing a and b. Infinity when no path exists.
double grid_oracle_distance(const ServiceArea& area, Location a, Location b);

// One gradient-check draw: a random small network and batch, backprop
// against a five-point central difference of the BCE loss evaluated through
// the forward pass (step 1e-4). Coordinates whose perturbation flips a ReLU
// are skipped. Returns the largest relative error; `checked` receives the
// number of coordinates compared.
double gradient_check_draw(std::uint64_t seed, std::size_t* checked = nullptr);

// Linearly separable samples: uniform features, label 1 iff the first two sum
// to more than 1, with a margin of 0.1 around the boundary left empty.
Dataset separable_toy_set(std::size_t n, std::uint64_t seed);

}  // namespace airground::test_support
