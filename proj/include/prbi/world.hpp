#pragma once

#include <cstdint>
#include <vector>

#include "prbi/defense.hpp"
#include "prbi/detections.hpp"

namespace prbi {

enum class AttackModel { Persistent, Intermittent };

struct WorldConfig {
  int n = 5;
  std::vector<VehicleId> attacker_set = {0};
  std::uint64_t seed = 1;
  int object_count = 20;
  double persist_prob = 0.9;
  double jitter_sigma = 0.05;
  double miss_prob = 0.05;
  double speed_max = 0.15;
  AttackModel attack_model = AttackModel::Persistent;
  int attack_period = 5;
  int attack_start = 1;
  double delta_del = 0.6;
  double delta_inj = 0.6;
};

struct WorldObject {
  long long id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int class_id = 0;
};

struct WorldState {
  int frame = 0;
  std::vector<WorldObject> objects;
  long long next_id = 0;
};

WorldState make_world(const WorldConfig& config);

// each object survives with persist_prob and drifts by its velocity on the
// wraparound plane; replacements spawn to hold object_count
WorldState step_world(const WorldState& state, const WorldConfig& config);

bool attack_active(AttackModel model, int attack_period, int attack_start, int frame);
bool attack_active(const WorldConfig& config, int frame);

// ground-truth-plus-noise renderer: a benign render is identical for every
// benign subset of the same frame; a subset containing an active attacker
// additionally loses a delta_del fraction of objects and gains
// delta_inj * |truth| spurious boxes kept spatially disjoint from the truth.
// Instances memoize world frames, so one instance is single-owner; run
// parallel scenarios on separate instances with distinct seeds.
class WorldOracle : public PerceptionOracle {
 public:
  explicit WorldOracle(const WorldConfig& config);

  DetectionSet perceive(const std::vector<VehicleId>& subset, int frame) const override;

  // noise-only render of the frame, independent of any subset
  DetectionSet benign_reference(int frame) const;
  // render with the corruption applied unconditionally
  DetectionSet corrupted_reference(int frame) const;

  const WorldState& world_at(int frame) const;
  const WorldConfig& config() const { return config_; }

 private:
  void ensure_frame(int frame) const;
  DetectionSet render(const WorldState& world, bool corrupted) const;

  WorldConfig config_;
  mutable std::vector<WorldState> frames_;
};

// fixed-geometry oracle for unit-level scenarios: benign subsets always see
// the same static box set, subsets holding an active attacker see a disjoint
// decoy set (mutual jaccard 0)
class EffectiveAttackOracle : public PerceptionOracle {
 public:
  EffectiveAttackOracle(int n, std::vector<VehicleId> attackers,
                        AttackModel model = AttackModel::Persistent, int attack_period = 1,
                        int attack_start = 1);

  DetectionSet perceive(const std::vector<VehicleId>& subset, int frame) const override;

  DetectionSet benign_set(int frame) const;

 private:
  int n_;
  std::vector<VehicleId> attackers_;
  AttackModel model_;
  int attack_period_;
  int attack_start_;
};

}  // namespace prbi
