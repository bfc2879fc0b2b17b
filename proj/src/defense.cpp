#include "prbi/defense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "prbi/stats.hpp"

namespace prbi {

long long round_nearest(double m) { return std::llround(m); }

long long apply_rounding(double m, Rounding mode) {
  switch (mode) {
    case Rounding::Floor:
      return static_cast<long long>(std::floor(m));
    case Rounding::Ceil:
      return static_cast<long long>(std::ceil(m));
    case Rounding::Nearest:
      return std::llround(m);
  }
  throw std::logic_error("apply_rounding: bad mode");
}

CounterState make_counters(int n) {
  if (n < 2) throw std::invalid_argument("make_counters: fleet size must be >= 2");
  CounterState c;
  c.n = n;
  c.c_normal.assign(n, 0);
  c.c_abnormal.assign(n, 0);
  c.total = 0;
  return c;
}

PrbiState make_prbi_state(int n) {
  PrbiState s;
  s.counters = make_counters(n);
  s.m = static_cast<double>(n - 1);
  s.p_benign.assign(n, 0.0);
  return s;
}

GroupPartition soft_sample(const std::vector<double>& p_benign, double m, Rounding rounding) {
  const int n = static_cast<int>(p_benign.size());
  std::vector<VehicleId> order(n);
  std::iota(order.begin(), order.end(), 0);
  // stable sort keeps equal probabilities in ascending id order
  std::stable_sort(order.begin(), order.end(),
                   [&](VehicleId a, VehicleId b) { return p_benign[a] < p_benign[b]; });
  long long g = apply_rounding(m, rounding);
  if (g < 0) g = 0;
  if (g > n - 1) g = n - 1;
  GroupPartition parts;
  parts.group1.assign(order.begin(), order.begin() + static_cast<std::size_t>(g));
  parts.group2.assign(order.begin() + static_cast<std::size_t>(g), order.end());
  return parts;
}

bool validate_group(const std::vector<VehicleId>& group, const DetectionSet& observed,
                    const DetectionSet& d_ref, double epsilon, double tau_match) {
  if (group.empty()) return true;
  return jaccard(observed, d_ref, tau_match) >= epsilon;
}

CounterState apply_frame_counts(CounterState counters, const std::vector<VehicleId>& group1,
                                bool ok1, const std::vector<VehicleId>& group2, bool ok2) {
  const int n = counters.n;
  std::vector<char> seen(n, 0);
  auto mark = [&](const std::vector<VehicleId>& group) {
    for (VehicleId id : group) {
      if (id < 0 || id >= n) throw std::invalid_argument("apply_frame_counts: id out of range");
      if (seen[id]) throw std::invalid_argument("apply_frame_counts: overlapping groups");
      seen[id] = 1;
    }
  };
  mark(group1);
  mark(group2);
  counters.total += 1;
  if (ok1)
    for (VehicleId id : group1) counters.c_normal[id] += 1;
  if (ok2)
    for (VehicleId id : group2) counters.c_normal[id] += 1;
  for (int i = 0; i < n; ++i) counters.c_abnormal[i] = counters.total - counters.c_normal[i];
  return counters;
}

double estimate_attacker_count(const CounterState& counters) {
  const double cap = static_cast<double>(counters.n - 1);
  long long sum_beta = 0;
  for (long long b : counters.c_normal) sum_beta += b;
  if (counters.total == 0 || sum_beta == 0) return cap;
  double m = std::log2(static_cast<double>(counters.n) * static_cast<double>(counters.total) /
                       static_cast<double>(sum_beta));
  if (m > cap) m = cap;
  if (m < 0.0) m = 0.0;
  return m;
}

std::vector<double> bayesian_update(const CounterState& counters,
                                    const std::vector<double>& p_prev, double gamma,
                                    double lambda) {
  const int n = counters.n;
  if (static_cast<int>(p_prev.size()) != n)
    throw std::invalid_argument("bayesian_update: p_prev length mismatch");
  if (counters.total == 0) return std::vector<double>(n, 0.0);
  long long sum_abnormal = 0;
  for (long long a : counters.c_abnormal) sum_abnormal += a;
  const double nn = static_cast<double>(n) * static_cast<double>(counters.total);
  const double p_attack = static_cast<double>(sum_abnormal) / nn;
  if (p_attack == 0.0) return p_prev;
  const double denom = nn - static_cast<double>(counters.total);
  std::vector<double> out(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double likelihood =
        (static_cast<double>(sum_abnormal) - static_cast<double>(counters.c_abnormal[j])) / denom;
    const double prior = gamma * p_prev[j] + lambda * static_cast<double>(counters.c_normal[j]) /
                                                 static_cast<double>(counters.total);
    double p = likelihood * prior / p_attack;
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    out[j] = p;
  }
  return out;
}

std::vector<VehicleId> select_attackers(const std::vector<double>& p_benign, double m) {
  const int n = static_cast<int>(p_benign.size());
  long long count = round_nearest(m);
  if (count < 0) count = 0;
  if (count > n - 1) count = n - 1;
  std::vector<VehicleId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](VehicleId a, VehicleId b) { return p_benign[a] < p_benign[b]; });
  std::vector<VehicleId> out(order.begin(), order.begin() + static_cast<std::size_t>(count));
  std::sort(out.begin(), out.end());
  return out;
}

bool t_test_converged(const std::deque<double>& window, double m, double alpha) {
  const std::vector<double> xs(window.begin(), window.end());
  return t_test_accepts(xs, m, alpha);
}

bool second_condition(const std::vector<double>& p_benign, double m) {
  long long zeros = 0;
  for (double p : p_benign)
    if (p == 0.0) ++zeros;
  return zeros == round_nearest(m);
}

RecoveryResult divide_and_conquer_recovery(const std::vector<VehicleId>& group1,
                                           const std::vector<VehicleId>& group2,
                                           const PerceptionOracle& oracle, int frame,
                                           const DetectionSet& d_ref, double epsilon,
                                           double tau_match) {
  RecoveryResult out;
  auto push_halves = [](std::deque<std::vector<VehicleId>>& queue,
                        const std::vector<VehicleId>& group) {
    if (group.size() < 2) return;
    const std::size_t half = (group.size() + 1) / 2;
    queue.emplace_back(group.begin(), group.begin() + half);
    queue.emplace_back(group.begin() + half, group.end());
  };
  // the two root groups already failed this frame, so the walk starts from
  // their halves; group1's whole tree is exhausted before group2's
  for (const std::vector<VehicleId>* root : {&group1, &group2}) {
    std::deque<std::vector<VehicleId>> queue;
    push_halves(queue, *root);
    while (!queue.empty()) {
      const std::vector<VehicleId> group = queue.front();
      queue.pop_front();
      const DetectionSet observed = oracle.perceive(group, frame);
      out.extra_verifications += 1;
      if (validate_group(group, observed, d_ref, epsilon, tau_match)) {
        out.collaborators = group;
        out.beta_increments = group;
        return out;
      }
      push_halves(queue, group);
    }
  }
  return out;
}

namespace {

std::vector<VehicleId> fleet_ids(int n) {
  std::vector<VehicleId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

std::vector<VehicleId> excluding(int n, const std::vector<VehicleId>& removed) {
  std::vector<char> drop(n, 0);
  for (VehicleId id : removed)
    if (id >= 0 && id < n) drop[id] = 1;
  std::vector<VehicleId> ids;
  for (int i = 0; i < n; ++i)
    if (!drop[i]) ids.push_back(i);
  return ids;
}

}  // namespace

FrameOutcome step(PrbiState& state, int frame, const PerceptionOracle& oracle,
                  const PrbiConfig& config) {
  const int n = state.counters.n;
  FrameOutcome out;

  if (frame == 0) {
    // the first frame is trusted and seeds the reference
    out.perception = oracle.perceive(fleet_ids(n), frame);
    state.d_ref = out.perception;
    return out;
  }

  if (state.converged) {
    out.perception = oracle.perceive(excluding(n, state.attackers), frame);
    state.d_ref = out.perception;
    return out;
  }

  const DetectionSet full = oracle.perceive(fleet_ids(n), frame);
  if (jaccard(full, state.d_ref, config.tau_match) >= config.epsilon) {
    out.perception = full;
    state.d_ref = full;
    return out;
  }

  out.flagged = true;
  const bool first_abnormal = (state.counters.total == 0);

  const GroupPartition groups = soft_sample(state.p_benign, state.m, config.grouping_rounding);
  bool ok1 = true;
  if (!groups.group1.empty()) {
    const DetectionSet observed = oracle.perceive(groups.group1, frame);
    ok1 = validate_group(groups.group1, observed, state.d_ref, config.epsilon, config.tau_match);
    out.verifications += 1;
  }
  bool ok2 = true;
  if (!groups.group2.empty()) {
    const DetectionSet observed = oracle.perceive(groups.group2, frame);
    ok2 = validate_group(groups.group2, observed, state.d_ref, config.epsilon, config.tau_match);
    out.verifications += 1;
  }

  state.counters = apply_frame_counts(state.counters, groups.group1, ok1, groups.group2, ok2);
  state.m = estimate_attacker_count(state.counters);
  state.p_benign = bayesian_update(state.counters, state.p_benign, config.gamma, config.lambda);
  state.attackers = select_attackers(state.p_benign, state.m);

  state.window.push_back(state.m);
  while (static_cast<int>(state.window.size()) > config.window_size) state.window.pop_front();

  if (t_test_converged(state.window, state.m, config.alpha) &&
      second_condition(state.p_benign, state.m)) {
    state.converged = true;
    out.converged_now = true;
    out.perception = oracle.perceive(excluding(n, state.attackers), frame);
    state.d_ref = out.perception;
    return out;
  }

  std::vector<VehicleId> collaborators;
  for (int i = 0; i < n; ++i)
    if (state.p_benign[i] != 0.0) collaborators.push_back(i);

  if (collaborators.empty() && first_abnormal) {
    const RecoveryResult rec = divide_and_conquer_recovery(
        groups.group1, groups.group2, oracle, frame, state.d_ref, config.epsilon, config.tau_match);
    out.verifications += rec.extra_verifications;
    for (VehicleId id : rec.beta_increments) {
      state.counters.c_normal[id] += 1;
      state.counters.c_abnormal[id] -= 1;
    }
    collaborators = rec.collaborators;
  }

  if (collaborators.empty()) {
    // nothing trustworthy this frame: emit nothing, keep the old reference
    out.perception.frame = frame;
    return out;
  }

  out.perception = oracle.perceive(collaborators, frame);
  state.d_ref = out.perception;
  return out;
}

namespace {

void append_doubles(std::string& out, const char* key, const std::vector<double>& xs) {
  out += key;
  char buf[64];
  for (double v : xs) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    out += buf;
  }
  out += '\n';
}

void append_longs(std::string& out, const char* key, const std::vector<long long>& xs) {
  out += key;
  char buf[32];
  for (long long v : xs) {
    std::snprintf(buf, sizeof(buf), " %lld", v);
    out += buf;
  }
  out += '\n';
}

}  // namespace

std::string to_text(const PrbiState& state) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "n %d\n", state.counters.n);
  out += buf;
  std::snprintf(buf, sizeof(buf), "N %lld\n", state.counters.total);
  out += buf;
  append_longs(out, "c_normal", state.counters.c_normal);
  append_longs(out, "c_abnormal", state.counters.c_abnormal);
  std::snprintf(buf, sizeof(buf), "m %.17g\n", state.m);
  out += buf;
  append_doubles(out, "p_benign", state.p_benign);
  append_doubles(out, "window", std::vector<double>(state.window.begin(), state.window.end()));
  std::snprintf(buf, sizeof(buf), "converged %d\n", state.converged ? 1 : 0);
  out += buf;
  out += "attackers";
  for (VehicleId id : state.attackers) {
    std::snprintf(buf, sizeof(buf), " %d", id);
    out += buf;
  }
  out += '\n';
  return out;
}

PrbiState prbi_state_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1;
  long long total = 0;
  std::vector<long long> c_normal, c_abnormal;
  double m = 0.0;
  std::vector<double> p_benign, window;
  bool converged = false;
  std::vector<VehicleId> attackers;
  std::vector<std::string> seen;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    seen.push_back(key);
    if (key == "n") {
      if (!(ls >> n)) throw std::runtime_error("state snapshot: bad n");
    } else if (key == "N") {
      if (!(ls >> total)) throw std::runtime_error("state snapshot: bad N");
    } else if (key == "c_normal" || key == "c_abnormal") {
      std::vector<long long> xs;
      long long v;
      while (ls >> v) xs.push_back(v);
      (key == "c_normal" ? c_normal : c_abnormal) = xs;
    } else if (key == "m") {
      if (!(ls >> m)) throw std::runtime_error("state snapshot: bad m");
    } else if (key == "p_benign" || key == "window") {
      std::vector<double> xs;
      double v;
      while (ls >> v) xs.push_back(v);
      (key == "p_benign" ? p_benign : window) = xs;
    } else if (key == "converged") {
      int v;
      if (!(ls >> v)) throw std::runtime_error("state snapshot: bad converged flag");
      converged = (v != 0);
    } else if (key == "attackers") {
      VehicleId id;
      while (ls >> id) attackers.push_back(id);
    } else {
      throw std::runtime_error("state snapshot: unknown field: " + key);
    }
  }

  for (const char* required : {"n", "N", "c_normal", "c_abnormal", "m", "p_benign", "window",
                               "converged", "attackers"}) {
    if (std::find(seen.begin(), seen.end(), required) == seen.end())
      throw std::runtime_error(std::string("state snapshot: missing field: ") + required);
  }
  if (n < 2) throw std::runtime_error("state snapshot: fleet size must be >= 2");
  if (static_cast<int>(c_normal.size()) != n || static_cast<int>(c_abnormal.size()) != n ||
      static_cast<int>(p_benign.size()) != n)
    throw std::runtime_error("state snapshot: per-vehicle array length mismatch");

  PrbiState s;
  s.counters.n = n;
  s.counters.total = total;
  s.counters.c_normal = c_normal;
  s.counters.c_abnormal = c_abnormal;
  s.m = m;
  s.p_benign = p_benign;
  s.window.assign(window.begin(), window.end());
  s.converged = converged;
  s.attackers = attackers;
  return s;
}

}  // namespace prbi
