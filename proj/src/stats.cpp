#include "prbi/stats.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace prbi {

mean_var mean_and_sample_variance(const std::vector<double>& xs) {
  mean_var out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double v : xs) sum += v;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double v : xs) {
    const double d = v - out.mean;
    ss += d * d;
  }
  out.sample_variance = ss / static_cast<double>(n - 1);
  return out;
}

namespace {

// modified Lentz continued-fraction evaluation for the incomplete beta
double beta_cont_fraction(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 1e-15;
  const double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // use the representation that converges fast for the given x
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_fraction(a, b, x) / a;
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
  if (df < 1) throw std::invalid_argument("student_t_cdf: df must be >= 1");
  const double d = static_cast<double>(df);
  const double x = d / (d + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * d, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double tail, int df) {
  if (df < 1) throw std::invalid_argument("student_t_quantile: df must be >= 1");
  if (!(tail > 0.0 && tail < 0.5))
    throw std::invalid_argument("student_t_quantile: tail must be in (0, 0.5)");
  double lo = 0.0;
  double hi = 1.0;
  while (1.0 - student_t_cdf(hi, df) > tail) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - student_t_cdf(mid, df) > tail)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

bool t_test_accepts(const std::vector<double>& xs, double mu, double alpha) {
  const std::size_t n = xs.size();
  if (n < 2) return false;
  const mean_var mv = mean_and_sample_variance(xs);
  const double s = std::sqrt(mv.sample_variance);
  if (s == 0.0) return mv.mean == mu;
  const double t = std::fabs(mv.mean - mu) / (s / std::sqrt(static_cast<double>(n)));
  return t <= student_t_quantile(0.5 * alpha, static_cast<int>(n) - 1);
}

}  // namespace prbi
