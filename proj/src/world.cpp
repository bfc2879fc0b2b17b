#include "prbi/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prbi/rng.hpp"

namespace prbi {

namespace {

constexpr double kWorldSize = 120.0;

// channel tags keep every noise draw on an independent keyed stream
constexpr std::uint64_t TAG_SPAWN = 0x535041574eull;
constexpr std::uint64_t TAG_PERSIST = 0x5045525349ull;
constexpr std::uint64_t TAG_MISS = 0x4d495353ull;
constexpr std::uint64_t TAG_JITTER = 0x4a495454ull;
constexpr std::uint64_t TAG_SCORE = 0x53434f52ull;
constexpr std::uint64_t TAG_DELETE = 0x44454cull;
constexpr std::uint64_t TAG_INJECT = 0x494e4aull;

double wrap(double x) {
  x = std::fmod(x, kWorldSize);
  if (x < 0.0) x += kWorldSize;
  return x;
}

double spawn_unit(const WorldConfig& config, long long id, std::uint64_t axis) {
  return unit_double(hash_mix({config.seed, TAG_SPAWN, static_cast<std::uint64_t>(id), axis}));
}

WorldObject spawn_object(const WorldConfig& config, long long id) {
  WorldObject obj;
  obj.id = id;
  obj.cx = kWorldSize * spawn_unit(config, id, 0);
  obj.cy = kWorldSize * spawn_unit(config, id, 1);
  obj.w = 2.5 + 1.5 * spawn_unit(config, id, 2);
  obj.h = 2.5 + 1.5 * spawn_unit(config, id, 3);
  obj.vx = config.speed_max * (2.0 * spawn_unit(config, id, 4) - 1.0);
  obj.vy = config.speed_max * (2.0 * spawn_unit(config, id, 5) - 1.0);
  obj.class_id = static_cast<int>(
      hash_mix({config.seed, TAG_SPAWN, static_cast<std::uint64_t>(id), 6}) % 3);
  return obj;
}

// standard normal from two keyed uniforms
double keyed_gaussian(std::uint64_t key_a, std::uint64_t key_b) {
  const double u1 = std::max(unit_double(key_a), 1e-300);
  const double u2 = unit_double(key_b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

bool boxes_separated(double cx1, double cy1, double w1, double h1, double cx2, double cy2,
                     double w2, double h2, double margin) {
  return std::fabs(cx1 - cx2) >= 0.5 * (w1 + w2) + margin ||
         std::fabs(cy1 - cy2) >= 0.5 * (h1 + h2) + margin;
}

}  // namespace

WorldState make_world(const WorldConfig& config) {
  if (config.object_count < 1) throw std::invalid_argument("make_world: object_count must be >= 1");
  WorldState state;
  state.frame = 0;
  state.objects.reserve(config.object_count);
  for (long long id = 0; id < config.object_count; ++id)
    state.objects.push_back(spawn_object(config, id));
  state.next_id = config.object_count;
  return state;
}

WorldState step_world(const WorldState& state, const WorldConfig& config) {
  WorldState next;
  next.frame = state.frame + 1;
  next.next_id = state.next_id;
  next.objects.reserve(config.object_count);
  for (const WorldObject& obj : state.objects) {
    const double u = unit_double(hash_mix({config.seed, TAG_PERSIST,
                                           static_cast<std::uint64_t>(next.frame),
                                           static_cast<std::uint64_t>(obj.id)}));
    if (u >= config.persist_prob) continue;
    WorldObject moved = obj;
    moved.cx = wrap(moved.cx + moved.vx);
    moved.cy = wrap(moved.cy + moved.vy);
    next.objects.push_back(moved);
  }
  while (static_cast<int>(next.objects.size()) < config.object_count)
    next.objects.push_back(spawn_object(config, next.next_id++));
  return next;
}

bool attack_active(AttackModel model, int attack_period, int attack_start, int frame) {
  if (frame < attack_start) return false;
  if (model == AttackModel::Persistent) return true;
  return (frame - attack_start) % attack_period == 0;
}

bool attack_active(const WorldConfig& config, int frame) {
  return attack_active(config.attack_model, config.attack_period, config.attack_start, frame);
}

WorldOracle::WorldOracle(const WorldConfig& config) : config_(config) {
  if (config_.n < 2) throw std::invalid_argument("WorldOracle: n must be >= 2");
  if (config_.attack_period < 1)
    throw std::invalid_argument("WorldOracle: attack_period must be >= 1");
  if (config_.attack_start < 1)
    throw std::invalid_argument("WorldOracle: attack_start must be >= 1");
  for (VehicleId v : config_.attacker_set)
    if (v < 0 || v >= config_.n)
      throw std::invalid_argument("WorldOracle: attacker id out of range");
  frames_.push_back(make_world(config_));
}

void WorldOracle::ensure_frame(int frame) const {
  while (static_cast<int>(frames_.size()) <= frame)
    frames_.push_back(step_world(frames_.back(), config_));
}

const WorldState& WorldOracle::world_at(int frame) const {
  if (frame < 0) throw std::invalid_argument("world_at: negative frame");
  ensure_frame(frame);
  return frames_[frame];
}

DetectionSet WorldOracle::render(const WorldState& world, bool corrupted) const {
  const std::uint64_t frame_key = static_cast<std::uint64_t>(world.frame);
  std::vector<const WorldObject*> kept;
  kept.reserve(world.objects.size());
  for (const WorldObject& obj : world.objects) kept.push_back(&obj);

  if (corrupted && !kept.empty()) {
    // frame-independent ranking keeps the concealed set stable while those
    // objects stay alive
    std::vector<std::pair<std::uint64_t, const WorldObject*>> ranked;
    ranked.reserve(kept.size());
    for (const WorldObject* obj : kept)
      ranked.push_back({hash_mix({config_.seed, TAG_DELETE, static_cast<std::uint64_t>(obj->id)}),
                        obj});
    std::sort(ranked.begin(), ranked.end());
    const auto remove_count = static_cast<std::size_t>(
        std::ceil(config_.delta_del * static_cast<double>(kept.size())));
    kept.clear();
    for (std::size_t i = remove_count; i < ranked.size(); ++i) kept.push_back(ranked[i].second);
  }

  DetectionSet out;
  out.frame = world.frame;
  for (const WorldObject* obj : kept) {
    const std::uint64_t id_key = static_cast<std::uint64_t>(obj->id);
    const double miss =
        unit_double(hash_mix({config_.seed, TAG_MISS, frame_key, id_key}));
    if (miss < config_.miss_prob) continue;
    Box2D box;
    box.cx = obj->cx + config_.jitter_sigma * obj->w *
                           keyed_gaussian(hash_mix({config_.seed, TAG_JITTER, frame_key, id_key, 0}),
                                          hash_mix({config_.seed, TAG_JITTER, frame_key, id_key, 1}));
    box.cy = obj->cy + config_.jitter_sigma * obj->h *
                           keyed_gaussian(hash_mix({config_.seed, TAG_JITTER, frame_key, id_key, 2}),
                                          hash_mix({config_.seed, TAG_JITTER, frame_key, id_key, 3}));
    box.w = obj->w;
    box.h = obj->h;
    box.class_id = obj->class_id;
    box.score =
        0.7 + 0.3 * unit_double(hash_mix({config_.seed, TAG_SCORE, frame_key, id_key}));
    out.boxes.push_back(box);
  }

  if (corrupted) {
    const long long decoys =
        std::llround(config_.delta_inj * static_cast<double>(world.objects.size()));
    for (long long slot = 0; slot < decoys; ++slot) {
      for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t key = hash_mix(
            {config_.seed, TAG_INJECT, frame_key, static_cast<std::uint64_t>(slot), attempt});
        const double cx = kWorldSize * unit_double(hash_mix({key, 0}));
        const double cy = kWorldSize * unit_double(hash_mix({key, 1}));
        const double w = 2.5 + 1.5 * unit_double(hash_mix({key, 2}));
        const double h = 2.5 + 1.5 * unit_double(hash_mix({key, 3}));
        bool clear = true;
        for (const WorldObject& obj : world.objects) {
          if (!boxes_separated(cx, cy, w, h, obj.cx, obj.cy, obj.w, obj.h, 1.0)) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;
        Box2D box;
        box.cx = cx;
        box.cy = cy;
        box.w = w;
        box.h = h;
        box.class_id = static_cast<int>(hash_mix({key, 4}) % 3);
        box.score = 0.7 + 0.3 * unit_double(hash_mix({key, 5}));
        out.boxes.push_back(box);
        break;
      }
    }
  }

  return out;
}

DetectionSet WorldOracle::perceive(const std::vector<VehicleId>& subset, int frame) const {
  if (subset.empty()) throw std::invalid_argument("perceive: empty subset");
  for (VehicleId v : subset)
    if (v < 0 || v >= config_.n) throw std::invalid_argument("perceive: vehicle id out of range");
  bool corrupted = false;
  if (attack_active(config_, frame)) {
    for (VehicleId v : subset) {
      if (std::find(config_.attacker_set.begin(), config_.attacker_set.end(), v) !=
          config_.attacker_set.end()) {
        corrupted = true;
        break;
      }
    }
  }
  return render(world_at(frame), corrupted);
}

DetectionSet WorldOracle::benign_reference(int frame) const {
  return render(world_at(frame), false);
}

DetectionSet WorldOracle::corrupted_reference(int frame) const {
  return render(world_at(frame), true);
}

EffectiveAttackOracle::EffectiveAttackOracle(int n, std::vector<VehicleId> attackers,
                                             AttackModel model, int attack_period,
                                             int attack_start)
    : n_(n),
      attackers_(std::move(attackers)),
      model_(model),
      attack_period_(attack_period),
      attack_start_(attack_start) {
  if (n_ < 2) throw std::invalid_argument("EffectiveAttackOracle: n must be >= 2");
  if (attack_period_ < 1)
    throw std::invalid_argument("EffectiveAttackOracle: attack_period must be >= 1");
  for (VehicleId v : attackers_)
    if (v < 0 || v >= n_)
      throw std::invalid_argument("EffectiveAttackOracle: attacker id out of range");
}

DetectionSet EffectiveAttackOracle::benign_set(int frame) const {
  DetectionSet out;
  out.frame = frame;
  for (int i = 0; i < 6; ++i) {
    Box2D box;
    box.cx = 10.0 * i + 5.0;
    box.cy = 5.0;
    box.w = 4.0;
    box.h = 4.0;
    box.class_id = 0;
    box.score = 0.9;
    out.boxes.push_back(box);
  }
  return out;
}

DetectionSet EffectiveAttackOracle::perceive(const std::vector<VehicleId>& subset,
                                             int frame) const {
  if (subset.empty()) throw std::invalid_argument("perceive: empty subset");
  for (VehicleId v : subset)
    if (v < 0 || v >= n_) throw std::invalid_argument("perceive: vehicle id out of range");
  bool corrupted = false;
  if (attack_active(model_, attack_period_, attack_start_, frame)) {
    for (VehicleId v : subset) {
      if (std::find(attackers_.begin(), attackers_.end(), v) != attackers_.end()) {
        corrupted = true;
        break;
      }
    }
  }
  if (!corrupted) return benign_set(frame);
  DetectionSet out;
  out.frame = frame;
  for (int i = 0; i < 6; ++i) {
    Box2D box;
    box.cx = 10.0 * i + 5.0;
    box.cy = 60.0;
    box.w = 4.0;
    box.h = 4.0;
    box.class_id = 1;
    box.score = 0.9;
    out.boxes.push_back(box);
  }
  return out;
}

}  // namespace prbi
