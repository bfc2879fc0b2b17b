#include <stdexcept>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "prbi/defense.hpp"
#include "prbi/world.hpp"

using namespace prbi;

namespace {

const double kLog2_5 = 2.321928094887362;      // log2(5)
const double kLog2_2_5 = 1.3219280948873622;   // log2(10/4)
const double kLog2_15_8 = 0.9068905956085187;  // log2(15/8)

std::vector<VehicleId> ids(std::initializer_list<VehicleId> list) { return list; }

}  // namespace

TEST_CASE("rounding helpers") {
  CHECK(apply_rounding(2.7, Rounding::Floor) == 2);
  CHECK(apply_rounding(2.7, Rounding::Ceil) == 3);
  CHECK(apply_rounding(1.3, Rounding::Ceil) == 2);
  CHECK(apply_rounding(2.5, Rounding::Nearest) == 3);  // half away from zero
  CHECK(round_nearest(2.2) == 2);
  CHECK(round_nearest(1.5) == 2);
  CHECK(round_nearest(0.4) == 0);
}

TEST_CASE("initial state") {
  CHECK_THROWS_AS(make_counters(1), std::invalid_argument);
  const PrbiState s = make_prbi_state(5);
  CHECK(s.counters.n == 5);
  CHECK(s.counters.total == 0);
  CHECK(s.m == 4.0);
  CHECK(s.p_benign == std::vector<double>(5, 0.0));
  CHECK(s.window.empty());
  CHECK(!s.converged);
  CHECK(s.attackers.empty());
}

TEST_CASE("soft sample partitions by suspicion") {
  {
    const GroupPartition p = soft_sample({0, 0, 0.5, 0.8, 0.9}, 2.7, Rounding::Floor);
    CHECK(p.group1 == ids({0, 1}));
    CHECK(p.group2 == ids({2, 3, 4}));
  }
  {
    const GroupPartition p = soft_sample({0, 0, 0, 0, 0}, 4.0, Rounding::Floor);
    CHECK(p.group1 == ids({0, 1, 2, 3}));
    CHECK(p.group2 == ids({4}));
  }
  {
    const GroupPartition p = soft_sample({0.1, 0.9, 0.2}, 1.3, Rounding::Ceil);
    CHECK(p.group1 == ids({0, 2}));
    CHECK(p.group2 == ids({1}));
  }
  {
    // floor below 1 leaves the suspicious group empty
    const GroupPartition p = soft_sample({0.3, 0.2}, 0.7, Rounding::Floor);
    CHECK(p.group1.empty());
    CHECK(p.group2 == ids({1, 0}));
  }
}

TEST_CASE("group validation against the reference") {
  const EffectiveAttackOracle oracle(5, {0});
  const DetectionSet ref = oracle.benign_set(1);
  const DetectionSet benign = oracle.perceive({1, 2}, 1);
  const DetectionSet corrupted = oracle.perceive({0, 1}, 1);
  CHECK(validate_group({1, 2}, benign, ref, 0.35, 0.5));
  CHECK(!validate_group({0, 1}, corrupted, ref, 0.35, 0.5));
  CHECK(validate_group({}, corrupted, ref, 0.35, 0.5));  // vacuous
}

TEST_CASE("frame count bookkeeping") {
  CounterState c = make_counters(5);
  SUBCASE("both groups pass") {
    c = apply_frame_counts(c, {0, 1}, true, {2, 3, 4}, true);
    CHECK(c.total == 1);
    CHECK(c.c_normal == std::vector<long long>({1, 1, 1, 1, 1}));
    CHECK(c.c_abnormal == std::vector<long long>({0, 0, 0, 0, 0}));
  }
  SUBCASE("only group2 passes") {
    c = apply_frame_counts(c, {0, 1}, false, {2, 3, 4}, true);
    CHECK(c.total == 1);
    CHECK(c.c_normal == std::vector<long long>({0, 0, 1, 1, 1}));
    CHECK(c.c_abnormal == std::vector<long long>({1, 1, 0, 0, 0}));
  }
  SUBCASE("both fail") {
    c = apply_frame_counts(c, {0, 1}, false, {2, 3, 4}, false);
    CHECK(c.total == 1);
    CHECK(c.c_normal == std::vector<long long>({0, 0, 0, 0, 0}));
    CHECK(c.c_abnormal == std::vector<long long>({1, 1, 1, 1, 1}));
  }
  SUBCASE("overlapping groups rejected") {
    CHECK_THROWS_AS(apply_frame_counts(c, {0, 1}, true, {1, 2}, true), std::invalid_argument);
    CHECK_THROWS_AS(apply_frame_counts(c, {0, 9}, true, {1}, true), std::invalid_argument);
  }
}

TEST_CASE("attacker count estimate") {
  CounterState c = make_counters(5);
  c.total = 4;
  c.c_normal = {4, 3, 2, 1, 0};  // sum 10
  CHECK(estimate_attacker_count(c) == doctest::Approx(1.0).epsilon(1e-12));
  c.total = 8;
  CHECK(estimate_attacker_count(c) == doctest::Approx(2.0).epsilon(1e-12));
  c.c_normal = {0, 0, 0, 0, 0};
  CHECK(estimate_attacker_count(c) == 4.0);
  c.total = 0;
  CHECK(estimate_attacker_count(c) == 4.0);
  // the log estimate is clamped into [0, n-1]
  c.total = 1000;
  c.c_normal = {1, 0, 0, 0, 0};
  CHECK(estimate_attacker_count(c) == 4.0);
  c.total = 1;
  c.c_normal = {1, 1, 1, 1, 2};
  CHECK(estimate_attacker_count(c) == 0.0);
}

TEST_CASE("bayesian posterior hand example") {
  CounterState c;
  c.n = 3;
  c.total = 4;
  c.c_normal = {4, 2, 0};
  c.c_abnormal = {0, 2, 4};
  {
    const std::vector<double> p = bayesian_update(c, {0.0, 0.0, 0.0}, 0.35, 0.65);
    CHECK(p[0] == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.325).epsilon(1e-12));
    CHECK(p[2] == 0.0);
  }
  {
    // a saturated prior clamps at 1
    const std::vector<double> p = bayesian_update(c, {1.0, 0.0, 0.0}, 0.35, 0.65);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == doctest::Approx(0.325).epsilon(1e-12));
    CHECK(p[2] == 0.0);
  }
}

TEST_CASE("bayesian update degenerate branches") {
  CounterState c = make_counters(3);
  // N = 0 -> all zero regardless of the prior
  CHECK(bayesian_update(c, {0.4, 0.5, 0.6}, 0.35, 0.65) == std::vector<double>(3, 0.0));
  // no abnormal evidence -> prior returned unchanged
  c.total = 2;
  c.c_normal = {2, 2, 2};
  c.c_abnormal = {0, 0, 0};
  const std::vector<double> prior = {0.4, 0.5, 0.6};
  CHECK(bayesian_update(c, prior, 0.35, 0.65) == prior);
  CHECK_THROWS_AS(bayesian_update(c, {0.5}, 0.35, 0.65), std::invalid_argument);
}

TEST_CASE("attacker selection") {
  CHECK(select_attackers({0, 0, 0.6, 0.7, 0.9}, 2.2) == ids({0, 1}));
  CHECK(select_attackers({0, 0, 0.6, 0.7, 0.9}, 0.4).empty());
  CHECK(select_attackers({0.5, 0.5, 0.9}, 1.0) == ids({0}));
  // output sorted ascending even when suspicion order differs
  CHECK(select_attackers({0.9, 0.1, 0.2}, 2.0) == ids({1, 2}));
}

TEST_CASE("window convergence test") {
  std::deque<double> constant(10, 2.0);
  CHECK(t_test_converged(constant, 2.0, 0.01));
  CHECK(!t_test_converged(constant, 3.0, 0.01));
  const std::deque<double> window = {1.8, 1.9, 2.0, 2.1, 2.2, 1.9, 2.0, 2.1, 2.0, 2.0};
  CHECK(t_test_converged(window, 2.0, 0.01));
  CHECK(!t_test_converged(window, 2.2, 0.01));
  CHECK(!t_test_converged({2.0}, 2.0, 0.01));  // one sample is never enough
}

TEST_CASE("second convergence condition counts exact zeros") {
  CHECK(second_condition({0, 0, 0.4, 0.8, 0.9}, 2.1));
  CHECK(!second_condition({0, 0, 0, 0.8, 0.9}, 2.1));
  CHECK(second_condition({0.1, 0.2, 0.3}, 0.3));
}

TEST_CASE("recovery walks the halving tree breadth-first") {
  const DetectionSet ref = EffectiveAttackOracle(5, {}).benign_set(1);
  SUBCASE("finds the benign half") {
    const EffectiveAttackOracle oracle(5, {0, 2});
    const RecoveryResult rec =
        divide_and_conquer_recovery({0, 1}, {2, 3, 4}, oracle, 1, ref, 0.35, 0.5);
    CHECK(rec.collaborators == ids({1}));
    CHECK(rec.extra_verifications == 2);  // {0} fails, {1} passes
    CHECK(rec.beta_increments == ids({1}));
  }
  SUBCASE("benign group1 resolves on its first half") {
    const EffectiveAttackOracle oracle(5, {4});
    const RecoveryResult rec =
        divide_and_conquer_recovery({0, 1}, {2, 3, 4}, oracle, 1, ref, 0.35, 0.5);
    CHECK(rec.collaborators == ids({0}));
    CHECK(rec.extra_verifications == 1);
  }
  SUBCASE("nothing passes when every vehicle lies") {
    const EffectiveAttackOracle oracle(5, {0, 1, 2, 3, 4});
    const RecoveryResult rec =
        divide_and_conquer_recovery({0, 1}, {2, 3, 4}, oracle, 1, ref, 0.35, 0.5);
    CHECK(rec.collaborators.empty());
    CHECK(rec.beta_increments.empty());
    // {0},{1} then {2,3},{4},{2},{3}
    CHECK(rec.extra_verifications == 6);
  }
}

TEST_CASE("single persistent attacker is converged on in three flagged frames") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {0});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  const DetectionSet benign = oracle.benign_set(0);

  const FrameOutcome f0 = step(state, 0, oracle, config);
  CHECK(!f0.flagged);
  CHECK(f0.verifications == 0);
  CHECK(jaccard(f0.perception, benign, config.tau_match) == 1.0);

  const FrameOutcome f1 = step(state, 1, oracle, config);
  CHECK(f1.flagged);
  CHECK(f1.verifications == 2);
  CHECK(state.counters.total == 1);
  CHECK(state.counters.c_normal == std::vector<long long>({0, 0, 0, 0, 1}));
  CHECK(state.m == doctest::Approx(kLog2_5).epsilon(1e-12));
  CHECK(state.p_benign[4] == doctest::Approx(0.8125).epsilon(1e-12));
  CHECK(state.attackers == ids({0, 1}));
  CHECK(!state.converged);
  // only the surviving collaborator set is emitted, and it is trusted
  CHECK(jaccard(f1.perception, benign, config.tau_match) == 1.0);

  const FrameOutcome f2 = step(state, 2, oracle, config);
  CHECK(f2.flagged);
  CHECK(f2.verifications == 2);
  CHECK(state.counters.c_normal == std::vector<long long>({0, 0, 1, 1, 2}));
  CHECK(state.m == doctest::Approx(kLog2_2_5).epsilon(1e-12));
  CHECK(state.p_benign[2] == doctest::Approx(0.3385416666666667).epsilon(1e-12));
  CHECK(state.p_benign[3] == doctest::Approx(0.3385416666666667).epsilon(1e-12));
  CHECK(state.p_benign[4] == 1.0);
  CHECK(state.attackers == ids({0}));
  CHECK(!state.converged);

  const FrameOutcome f3 = step(state, 3, oracle, config);
  CHECK(f3.flagged);
  CHECK(f3.converged_now);
  CHECK(state.converged);
  CHECK(state.m == doctest::Approx(kLog2_15_8).epsilon(1e-12));
  CHECK(state.attackers == ids({0}));
  CHECK(state.p_benign[0] == 0.0);

  // converged operation: attacker excluded, no further verifications
  for (int frame = 4; frame < 10; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    CHECK(!out.flagged);
    CHECK(out.verifications == 0);
    CHECK(jaccard(out.perception, benign, config.tau_match) == 1.0);
  }
}

TEST_CASE("benign fleet never triggers the defense") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  int total_verifications = 0;
  for (int frame = 0; frame < 100; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    CHECK(!out.flagged);
    total_verifications += out.verifications;
  }
  CHECK(total_verifications == 0);
  CHECK(state.m == 4.0);
  CHECK(state.counters.total == 0);
  CHECK(!state.converged);
}

TEST_CASE("attack onset mid-scenario") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {0, 1}, AttackModel::Persistent, 1, 10);
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  for (int frame = 0; frame < 10; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    CHECK(!out.flagged);
  }
  int flagged = 0;
  int converged_at = -1;
  for (int frame = 10; frame < 20; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    if (out.flagged) ++flagged;
    if (out.converged_now) converged_at = frame;
  }
  CHECK(flagged == 3);
  CHECK(converged_at == 12);
  CHECK(state.attackers == ids({0, 1}));
}

TEST_CASE("four attackers converge with bounded per-frame cost") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {0, 1, 2, 3});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  int max_ver = 0;
  int converged_at = -1;
  for (int frame = 0; frame < 12; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    max_ver = std::max(max_ver, out.verifications);
    if (out.converged_now) converged_at = frame;
  }
  CHECK(converged_at == 3);
  CHECK(state.attackers == ids({0, 1, 2, 3}));
  CHECK(max_ver == 2);
  CHECK(max_ver <= 8);
}

TEST_CASE("first abnormal frame with no survivors uses recovery") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {0, 4});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  step(state, 0, oracle, config);
  const FrameOutcome f1 = step(state, 1, oracle, config);
  CHECK(f1.flagged);
  // two failed groups plus {0,1} failing and {2,3} passing inside recovery
  CHECK(f1.verifications == 4);
  CHECK(state.counters.total == 1);
  CHECK(state.counters.c_normal == std::vector<long long>({0, 0, 1, 1, 0}));
  CHECK(state.counters.c_abnormal == std::vector<long long>({1, 1, 0, 0, 1}));
  CHECK(jaccard(f1.perception, oracle.benign_set(1), config.tau_match) == 1.0);
}

TEST_CASE("flagged frame with nothing trustworthy emits an empty set") {
  const int n = 4;
  const EffectiveAttackOracle oracle(n, {0, 1, 2, 3});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  const FrameOutcome f0 = step(state, 0, oracle, config);
  const DetectionSet ref = f0.perception;
  const FrameOutcome f1 = step(state, 1, oracle, config);
  CHECK(f1.flagged);
  CHECK(f1.perception.boxes.empty());
  // the reference is not poisoned by the empty fallback
  CHECK(jaccard(state.d_ref, ref, config.tau_match) == 1.0);
  // 2 group checks, then recovery probes {0,1},{2},{0},{1}; the singleton
  // root {3} has no halves left to try
  CHECK(f1.verifications == 6);
}

TEST_CASE("state invariants hold along a run") {
  const int n = 6;
  const EffectiveAttackOracle oracle(n, {0, 1});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  for (int frame = 0; frame < 40; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, config);
    for (int i = 0; i < n; ++i) {
      CHECK(state.counters.c_normal[i] + state.counters.c_abnormal[i] == state.counters.total);
      CHECK(state.p_benign[i] >= 0.0);
      CHECK(state.p_benign[i] <= 1.0);
    }
    CHECK(state.m >= 0.0);
    CHECK(state.m <= n - 1.0);
    // vehicles 0 and 1 are in every failing group and never in a passing one
    CHECK(state.counters.c_normal[0] == 0);
    CHECK(state.p_benign[0] == 0.0);
    if (out.converged_now) {
      CHECK(static_cast<long long>(state.attackers.size()) == round_nearest(state.m));
      for (VehicleId v : state.attackers) CHECK(state.p_benign[v] == 0.0);
    }
  }
  CHECK(state.converged);
}

TEST_CASE("trajectories are deterministic") {
  const int n = 5;
  const PrbiConfig config;
  const EffectiveAttackOracle oracle(n, {0, 2});
  PrbiState a = make_prbi_state(n);
  PrbiState b = make_prbi_state(n);
  for (int frame = 0; frame < 25; ++frame) {
    step(a, frame, oracle, config);
    step(b, frame, oracle, config);
    CHECK(to_text(a) == to_text(b));
  }
}

TEST_CASE("state snapshot round trip") {
  const int n = 5;
  const EffectiveAttackOracle oracle(n, {0});
  const PrbiConfig config;
  PrbiState state = make_prbi_state(n);
  for (int frame = 0; frame < 3; ++frame) step(state, frame, oracle, config);

  const std::string text = to_text(state);
  const PrbiState back = prbi_state_from_text(text);
  CHECK(back.counters.n == state.counters.n);
  CHECK(back.counters.total == state.counters.total);
  CHECK(back.counters.c_normal == state.counters.c_normal);
  CHECK(back.counters.c_abnormal == state.counters.c_abnormal);
  CHECK(back.m == state.m);  // %.17g round-trips exactly
  CHECK(back.p_benign == state.p_benign);
  CHECK(back.window == state.window);
  CHECK(back.converged == state.converged);
  CHECK(back.attackers == state.attackers);
  CHECK(to_text(back) == text);
}

TEST_CASE("state snapshot rejects malformed input") {
  CHECK_THROWS_AS(prbi_state_from_text(""), std::runtime_error);
  CHECK_THROWS_AS(prbi_state_from_text("n 5\nN 0\n"), std::runtime_error);  // missing fields
  const std::string good = to_text(make_prbi_state(3));
  CHECK_THROWS_AS(prbi_state_from_text(good + "mystery 4\n"), std::runtime_error);
  CHECK_THROWS_AS(prbi_state_from_text("n one\n"), std::runtime_error);
  // per-vehicle array length disagreeing with n
  std::string bad = good;
  const std::size_t at = bad.find("p_benign");
  bad = bad.substr(0, at) + "p_benign 0 0\n" + bad.substr(bad.find('\n', at) + 1);
  CHECK_THROWS_AS(prbi_state_from_text(bad), std::runtime_error);
}
