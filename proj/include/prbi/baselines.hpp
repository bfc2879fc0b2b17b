#pragma once

#include <cstdint>
#include <vector>

#include "prbi/defense.hpp"

namespace prbi {

struct BaselineOutcome {
  std::vector<VehicleId> collaborators;
  int verifications = 0;
};

// samples uniformly random non-empty subsets and validates each against
// d_ref until one passes; hitting the retry cap returns empty collaborators
// with the cap as the count
BaselineOutcome random_consensus_step(int n, const PerceptionOracle& oracle, int frame,
                                      const DetectionSet& d_ref, double epsilon,
                                      double tau_match, std::uint64_t seed,
                                      int max_trials = 50);

// validates the full set, then recursively halves every failing group,
// collecting all passing leaves; every validation counts
BaselineOutcome sequential_split_step(int n, const PerceptionOracle& oracle, int frame,
                                      const DetectionSet& d_ref, double epsilon,
                                      double tau_match);

}  // namespace prbi
