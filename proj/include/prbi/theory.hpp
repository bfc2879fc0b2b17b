#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prbi/defense.hpp"

namespace prbi {

struct Rational {
  long long num = 0;
  long long den = 1;
};

bool rational_equal(const Rational& a, const Rational& b);

// probability that a uniformly random non-empty subset of n vehicles misses
// all k attackers: (2^(n-k) - 1) / (2^n - 1)
Rational p_ideal_exact(int n, int k);
double p_ideal(int n, int k);

// the 2^-k approximation of the same quantity
double p_ideal_approx(int n, int k);

// exhaustive enumeration of every non-empty subset against a fixed
// k-attacker mask; must agree with p_ideal_exact identically
Rational brute_force_all_benign(int n, int k);

// the value the attacker estimate settles at under each grouping rounding
double convergence_target(int n, int k, Rounding rounding);

// one idealized frame transition of the estimate from counter state
// (N, sum_beta): groups containing an active attacker fail, all-benign
// groups pass. Same clamps as the live estimator.
double drift_next_m(int n, int k, long long total, long long sum_beta, Rounding rounding);

// f(m) = m + m / (2^m - 1), the quantity that must stay below n
double key_inequality_lhs(double m);
bool key_inequality_holds(int n, double m);

// fraction of all-benign groups over `rounds` uniform random binary splits
// of the fleet (each split yields two groups; empty sides count, vacuously
// benign)
double mc_grouping_eta(int n, int k, int rounds, std::uint64_t seed);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// the full self-verification table used by the theory subcommand
std::vector<CheckResult> run_theory_checks(int max_brute_force_n);

}  // namespace prbi
