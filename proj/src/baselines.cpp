#include "prbi/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "prbi/rng.hpp"

namespace prbi {

namespace {

bool subset_passes(const std::vector<VehicleId>& subset, const PerceptionOracle& oracle,
                   int frame, const DetectionSet& d_ref, double epsilon, double tau_match) {
  const DetectionSet observed = oracle.perceive(subset, frame);
  return jaccard(observed, d_ref, tau_match) >= epsilon;
}

}  // namespace

BaselineOutcome random_consensus_step(int n, const PerceptionOracle& oracle, int frame,
                                      const DetectionSet& d_ref, double epsilon,
                                      double tau_match, std::uint64_t seed, int max_trials) {
  if (n < 2) throw std::invalid_argument("random_consensus_step: n must be >= 2");
  if (max_trials < 1) throw std::invalid_argument("random_consensus_step: max_trials must be >= 1");
  const std::uint64_t all = (1ull << n) - 1;
  BaselineOutcome out;
  std::uint64_t draw = 0;
  for (int trial = 0; trial < max_trials; ++trial) {
    std::uint64_t mask = 0;
    while (mask == 0)
      mask = hash_mix({seed, static_cast<std::uint64_t>(frame), draw++}) & all;
    std::vector<VehicleId> subset;
    for (int v = 0; v < n; ++v)
      if (mask & (1ull << v)) subset.push_back(v);
    ++out.verifications;
    if (subset_passes(subset, oracle, frame, d_ref, epsilon, tau_match)) {
      out.collaborators = subset;
      return out;
    }
  }
  return out;
}

namespace {

void split_recurse(const std::vector<VehicleId>& group, const PerceptionOracle& oracle,
                   int frame, const DetectionSet& d_ref, double epsilon, double tau_match,
                   BaselineOutcome& out) {
  ++out.verifications;
  if (subset_passes(group, oracle, frame, d_ref, epsilon, tau_match)) {
    out.collaborators.insert(out.collaborators.end(), group.begin(), group.end());
    return;
  }
  if (group.size() < 2) return;
  const std::size_t half = (group.size() + 1) / 2;
  const std::vector<VehicleId> first(group.begin(), group.begin() + half);
  const std::vector<VehicleId> second(group.begin() + half, group.end());
  split_recurse(first, oracle, frame, d_ref, epsilon, tau_match, out);
  split_recurse(second, oracle, frame, d_ref, epsilon, tau_match, out);
}

}  // namespace

BaselineOutcome sequential_split_step(int n, const PerceptionOracle& oracle, int frame,
                                      const DetectionSet& d_ref, double epsilon,
                                      double tau_match) {
  if (n < 2) throw std::invalid_argument("sequential_split_step: n must be >= 2");
  std::vector<VehicleId> everyone;
  everyone.reserve(n);
  for (int v = 0; v < n; ++v) everyone.push_back(v);
  BaselineOutcome out;
  split_recurse(everyone, oracle, frame, d_ref, epsilon, tau_match, out);
  std::sort(out.collaborators.begin(), out.collaborators.end());
  return out;
}

}  // namespace prbi
