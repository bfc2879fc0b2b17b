#include "prbi/theory.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "prbi/rng.hpp"

namespace prbi {

namespace {

void check_domain(int n, int k) {
  if (n < 2 || n > 62) throw std::invalid_argument("attacker probability: n must be in [2, 62]");
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("attacker probability: k must be in [1, n-1]");
}

long long pow2ll(int e) { return 1ll << e; }

}  // namespace

bool rational_equal(const Rational& a, const Rational& b) {
  // cross products stay well inside 64 bits for the n <= 20 domain used here
  return a.num * b.den == b.num * a.den;
}

Rational p_ideal_exact(int n, int k) {
  check_domain(n, k);
  return {pow2ll(n - k) - 1, pow2ll(n) - 1};
}

double p_ideal(int n, int k) {
  const Rational r = p_ideal_exact(n, k);
  return static_cast<double>(r.num) / static_cast<double>(r.den);
}

double p_ideal_approx(int n, int k) {
  if (n < 2 || k < 0 || k > n) throw std::invalid_argument("p_ideal_approx: bad parameters");
  return std::exp2(-static_cast<double>(k));
}

Rational brute_force_all_benign(int n, int k) {
  check_domain(n, k);
  if (n > 24) throw std::invalid_argument("brute_force_all_benign: n too large to enumerate");
  const std::uint64_t attacker_mask = (1ull << k) - 1;
  const std::uint64_t subsets = (1ull << n) - 1;
  long long benign = 0;
  for (std::uint64_t s = 1; s <= subsets; ++s)
    if ((s & attacker_mask) == 0) ++benign;
  return {benign, static_cast<long long>(subsets)};
}

double convergence_target(int n, int k, Rounding rounding) {
  check_domain(n, k);
  switch (rounding) {
    case Rounding::Floor:
      return static_cast<double>(k);
    case Rounding::Nearest:
      return static_cast<double>(k) - 0.5;
    case Rounding::Ceil:
      if (k >= 2) return static_cast<double>(k) - 1.0;
      return std::log2(static_cast<double>(n) / static_cast<double>(n - 1));
  }
  throw std::logic_error("convergence_target: bad rounding");
}

double drift_next_m(int n, int k, long long total, long long sum_beta, Rounding rounding) {
  check_domain(n, k);
  if (total < 0 || sum_beta < 0 || sum_beta > static_cast<long long>(n) * total)
    throw std::invalid_argument("drift_next_m: inconsistent counter state");
  const double cap = static_cast<double>(n - 1);
  CounterState c = make_counters(n);
  c.total = total;
  if (n > 0) c.c_normal[n - 1] = sum_beta;  // only the sum matters to the estimate
  const double m = estimate_attacker_count(c);
  const long long g = apply_rounding(m, rounding);

  // g < k: the suspicious group is all attackers and the rest still holds
  // one, so both groups fail and only N advances. g >= k: the suspicious
  // group captures every attacker and the remaining n - g vehicles pass.
  double next;
  const double numer = static_cast<double>(n) * static_cast<double>(total + 1);
  if (g < k) {
    if (sum_beta == 0) return cap;
    next = std::log2(numer / static_cast<double>(sum_beta));
  } else {
    next = std::log2(numer / static_cast<double>(sum_beta + n - g));
  }
  if (next > cap) next = cap;
  if (next < 0.0) next = 0.0;
  return next;
}

double key_inequality_lhs(double m) {
  return m + m / (std::exp2(m) - 1.0);
}

bool key_inequality_holds(int n, double m) {
  return key_inequality_lhs(m) < static_cast<double>(n);
}

double mc_grouping_eta(int n, int k, int rounds, std::uint64_t seed) {
  if (n < 2 || n > 62 || k < 0 || k > n) throw std::invalid_argument("mc_grouping_eta: bad parameters");
  if (rounds < 1) throw std::invalid_argument("mc_grouping_eta: rounds must be >= 1");
  const std::uint64_t attacker_mask = (1ull << k) - 1;
  const std::uint64_t all = (1ull << n) - 1;
  long long benign_groups = 0;
  for (int r = 0; r < rounds; ++r) {
    const std::uint64_t group1 = hash_mix({seed, 0x67726f7570ull, static_cast<std::uint64_t>(r)}) & all;
    const std::uint64_t group2 = all & ~group1;
    if ((group1 & attacker_mask) == 0) ++benign_groups;
    if ((group2 & attacker_mask) == 0) ++benign_groups;
  }
  return static_cast<double>(benign_groups) / (2.0 * static_cast<double>(rounds));
}

namespace {

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// deterministic reachable counter state for the drift checks: sum_beta >= 1,
// at most (n - k) passes per frame, and an unclamped current estimate
bool random_reachable_state(int n, int k, std::uint64_t key, long long& total,
                            long long& sum_beta) {
  const long long N = 1 + static_cast<long long>(hash_mix({key, 1}) % 200);
  const double unclamped_bound =
      static_cast<double>(n) * static_cast<double>(N) / std::exp2(n - 1);
  const long long lo = std::max(1ll, static_cast<long long>(std::floor(unclamped_bound)) + 1);
  const long long hi = static_cast<long long>(n - k) * N;
  if (lo > hi) return false;
  total = N;
  sum_beta = lo + static_cast<long long>(hash_mix({key, 2}) % static_cast<std::uint64_t>(hi - lo + 1));
  return true;
}

}  // namespace

std::vector<CheckResult> run_theory_checks(int max_brute_force_n) {
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, bool ok, const std::string& detail) {
    out.push_back({name, ok, detail});
  };

  {
    // closed form rounds to the published three-decimal values at n = 5
    const double want[4] = {0.484, 0.226, 0.097, 0.032};
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 4; ++k) {
      const double got = std::round(p_ideal(5, k) * 1000.0) / 1000.0;
      if (got != want[k - 1]) {
        ok = false;
        detail += fmt("k got %.3f want %.3f; ", got, want[k - 1]);
      }
    }
    add("closed_form_three_decimals_n5", ok, ok ? "0.484 0.226 0.097 0.032" : detail);
  }

  {
    bool ok = true;
    std::string detail = "all n,k agree";
    for (int n = 2; n <= max_brute_force_n && ok; ++n) {
      for (int k = 1; k <= n - 1; ++k) {
        if (!rational_equal(brute_force_all_benign(n, k), p_ideal_exact(n, k))) {
          ok = false;
          detail = fmt("mismatch at n=%.0f k=%.0f", n, k);
          break;
        }
      }
    }
    add("brute_force_matches_closed_form", ok, detail);
  }

  {
    bool ok = true;
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const double gap = std::fabs(p_ideal(5, k) - p_ideal_approx(5, k));
      worst = std::max(worst, gap);
      if (gap > 0.032) ok = false;
    }
    add("approximation_gap_n5", ok, fmt("max |exact - 2^-k| = %.4f <= %.3f", worst, 0.032));
  }

  {
    bool ok = true;
    double worst_margin = 1e9;
    for (int n = 3; n <= 20 && ok; ++n) {
      const int points = 10000;
      for (int i = 0; i <= points; ++i) {
        const double m = 1.0 + (static_cast<double>(n - 2) * i) / points;
        const double margin = static_cast<double>(n) - key_inequality_lhs(m);
        worst_margin = std::min(worst_margin, margin);
        if (margin <= 0.0) {
          ok = false;
          break;
        }
      }
    }
    const double boundary = key_inequality_lhs(1.0);
    if (std::fabs(boundary - 2.0) > 1e-12) ok = false;
    add("key_inequality_grid", ok,
        fmt("min margin %.4f; boundary f(1) = %.12f", worst_margin, boundary));
  }

  {
    bool ok = true;
    const int points = 20000;
    double prev = key_inequality_lhs(1.0);
    for (int i = 1; i <= points; ++i) {
      const double m = 1.0 + (18.0 * i) / points;
      const double cur = key_inequality_lhs(m);
      if (cur <= prev) {
        ok = false;
        break;
      }
      prev = cur;
    }
    add("key_inequality_monotone", ok, "f strictly increasing on [1, 19]");
  }

  {
    bool ok = true;
    std::string detail = "all transitions move toward k";
    long long checked = 0;
    for (int n = 3; n <= 10 && ok; ++n) {
      for (int k = 1; k <= n - 1 && ok; ++k) {
        int generated = 0;
        std::uint64_t counter = 0;
        while (generated < 1000) {
          long long total = 0, sum_beta = 0;
          const std::uint64_t key = hash_mix({0xd41f7ull, static_cast<std::uint64_t>(n),
                                              static_cast<std::uint64_t>(k), counter++});
          if (!random_reachable_state(n, k, key, total, sum_beta)) continue;
          ++generated;
          ++checked;
          CounterState c = make_counters(n);
          c.total = total;
          c.c_normal[n - 1] = sum_beta;
          const double m = estimate_attacker_count(c);
          const double next = drift_next_m(n, k, total, sum_beta, Rounding::Floor);
          const bool below = std::floor(m) < k;
          if ((below && !(next > m)) || (!below && !(next < m))) {
            ok = false;
            detail = fmt("wrong direction at m=%.4f next=%.4f", m, next);
          }
        }
      }
    }
    if (ok) detail = fmt("%.0f states checked", static_cast<double>(checked), 0.0);
    add("drift_direction", ok, detail);
  }

  {
    bool ok = true;
    for (long long N = 1; N <= 100; ++N) {
      const double next = drift_next_m(2, 1, N, N, Rounding::Floor);
      if (std::fabs(next - 1.0) > 1e-12) ok = false;
    }
    add("two_vehicle_fixed_point", ok, "m' = 1 for every reachable state");
  }

  {
    bool ok = true;
    ok = ok && std::fabs(convergence_target(6, 1, Rounding::Ceil) - std::log2(6.0 / 5.0)) < 1e-12;
    ok = ok && convergence_target(6, 5, Rounding::Floor) == 5.0;
    ok = ok && convergence_target(6, 5, Rounding::Nearest) == 4.5;
    ok = ok && convergence_target(6, 2, Rounding::Ceil) == 1.0;
    add("convergence_targets", ok, "floor -> k, nearest -> k-0.5, ceil -> k-1 (k=1 special)");
  }

  {
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 4; ++k) {
      double sum = 0.0;
      const int seeds = 50;
      for (int s = 1; s <= seeds; ++s) sum += mc_grouping_eta(5, k, 60, static_cast<std::uint64_t>(s));
      const double mean = sum / seeds;
      const double target = std::exp2(-k);
      if (std::fabs(mean - target) > 0.03) {
        ok = false;
        detail += fmt("k mean %.4f vs %.4f; ", mean, target);
      }
    }
    add("grouping_eta_monte_carlo", ok, ok ? "eta within 0.03 of 2^-k for k=1..4" : detail);
  }

  return out;
}

}  // namespace prbi
