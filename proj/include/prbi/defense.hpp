#pragma once

#include <deque>
#include <string>
#include <vector>

#include "prbi/detections.hpp"

namespace prbi {

using VehicleId = int;

enum class Rounding { Floor, Ceil, Nearest };

// half cases round away from zero
long long round_nearest(double m);
long long apply_rounding(double m, Rounding mode);

// per-vehicle normal counts beta_i, abnormal counts N - beta_i, and the
// shared flagged-frame total N
struct CounterState {
  int n = 0;
  std::vector<long long> c_normal;
  std::vector<long long> c_abnormal;
  long long total = 0;
};

CounterState make_counters(int n);

struct PrbiConfig {
  double epsilon = 0.35;
  int window_size = 10;
  double alpha = 0.01;
  double gamma = 0.35;
  double lambda = 0.65;
  double tau_match = 0.5;
  Rounding grouping_rounding = Rounding::Floor;
};

struct GroupPartition {
  std::vector<VehicleId> group1;  // the most suspicious vehicles
  std::vector<VehicleId> group2;  // everyone else
};

struct PerceptionOracle {
  virtual ~PerceptionOracle() = default;
  // fused detection output of exactly this subset's members at the frame;
  // same (subset, frame) must always produce identical output
  virtual DetectionSet perceive(const std::vector<VehicleId>& subset, int frame) const = 0;
};

struct PrbiState {
  CounterState counters;
  double m = 0.0;
  std::vector<double> p_benign;
  std::deque<double> window;
  DetectionSet d_ref;
  bool converged = false;
  std::vector<VehicleId> attackers;
};

PrbiState make_prbi_state(int n);

struct FrameOutcome {
  DetectionSet perception;
  int verifications = 0;
  bool flagged = false;
  bool converged_now = false;
};

// partition by ascending benign probability (ties by ascending id):
// group1 = the first rounded(m) vehicles, group2 = the remainder
GroupPartition soft_sample(const std::vector<double>& p_benign, double m, Rounding rounding);

// a group passes when its fused output stays consistent with the reference;
// an empty group passes vacuously
bool validate_group(const std::vector<VehicleId>& group, const DetectionSet& observed,
                    const DetectionSet& d_ref, double epsilon, double tau_match);

// beta + 1 for members of each passing group, one shared total increment,
// abnormal counts recomputed as total - beta
CounterState apply_frame_counts(CounterState counters, const std::vector<VehicleId>& group1,
                                bool ok1, const std::vector<VehicleId>& group2, bool ok2);

// m = min(log2(n * N / sum(beta)), n - 1); degenerate counters -> n - 1
double estimate_attacker_count(const CounterState& counters);

std::vector<double> bayesian_update(const CounterState& counters,
                                    const std::vector<double>& p_prev, double gamma,
                                    double lambda);

// the round_nearest(m) vehicles with the lowest benign probability,
// returned in ascending id order
std::vector<VehicleId> select_attackers(const std::vector<double>& p_benign, double m);

bool t_test_converged(const std::deque<double>& window, double m, double alpha);

// the count of exactly-zero benign probabilities must equal round_nearest(m)
bool second_condition(const std::vector<double>& p_benign, double m);

struct RecoveryResult {
  std::vector<VehicleId> collaborators;
  int extra_verifications = 0;
  std::vector<VehicleId> beta_increments;
};

// breadth-first walk of the halving tree under the two failed groups
// (group1's tree first), returning the first subset that validates; failed
// singletons are abandoned; no subset -> empty collaborators
RecoveryResult divide_and_conquer_recovery(const std::vector<VehicleId>& group1,
                                           const std::vector<VehicleId>& group2,
                                           const PerceptionOracle& oracle, int frame,
                                           const DetectionSet& d_ref, double epsilon,
                                           double tau_match);

FrameOutcome step(PrbiState& state, int frame, const PerceptionOracle& oracle,
                  const PrbiConfig& config);

// state snapshot as a line-oriented text record; fields:
// n, N, c_normal, c_abnormal, m, p_benign, window, converged, attackers
std::string to_text(const PrbiState& state);
PrbiState prbi_state_from_text(const std::string& text);

}  // namespace prbi
