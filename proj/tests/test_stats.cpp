#include <stdexcept>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "prbi/stats.hpp"

using namespace prbi;

TEST_CASE("mean and sample variance") {
  const std::vector<double> xs = {1.8, 1.9, 2.0, 2.1, 2.2, 1.9, 2.0, 2.1, 2.0, 2.0};
  const mean_var mv = mean_and_sample_variance(xs);
  CHECK(mv.mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::sqrt(mv.sample_variance) == doctest::Approx(0.115470).epsilon(1e-4));

  CHECK(mean_and_sample_variance({}).mean == 0.0);
  CHECK(mean_and_sample_variance({3.5}).mean == 3.5);
  CHECK(mean_and_sample_variance({3.5}).sample_variance == 0.0);
}

TEST_CASE("regularized incomplete beta basics") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK(regularized_incomplete_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-10));
  // I_x(1, 1) is the identity
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-10));
  // I_x(1/2, 1/2) = (2/pi) asin(sqrt(x))
  CHECK(regularized_incomplete_beta(0.5, 0.5, 0.25) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -2.0, 0.5), std::invalid_argument);
}

TEST_CASE("student t cdf") {
  CHECK(student_t_cdf(0.0, 7) == doctest::Approx(0.5).epsilon(1e-12));
  for (int df : {1, 3, 10}) {
    for (double t : {0.3, 1.7, 4.2}) {
      CHECK(student_t_cdf(-t, df) ==
            doctest::Approx(1.0 - student_t_cdf(t, df)).epsilon(1e-10));
    }
  }
  // df = 1 is a Cauchy: P(T <= 1) = 3/4
  CHECK(student_t_cdf(1.0, 1) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK_THROWS_AS(student_t_cdf(1.0, 0), std::invalid_argument);
}

TEST_CASE("student t critical values match tables") {
  CHECK(student_t_quantile(0.005, 9) == doctest::Approx(3.249836).epsilon(1e-4));
  CHECK(student_t_quantile(0.025, 10) == doctest::Approx(2.228139).epsilon(1e-4));
  CHECK(student_t_quantile(0.05, 5) == doctest::Approx(2.015048).epsilon(1e-4));
  CHECK(student_t_quantile(0.005, 1) == doctest::Approx(63.656741).epsilon(1e-4));
  CHECK(student_t_quantile(0.005, 2) == doctest::Approx(9.924843).epsilon(1e-4));
  // quantile inverts the cdf
  CHECK(student_t_cdf(student_t_quantile(0.025, 10), 10) ==
        doctest::Approx(0.975).epsilon(1e-9));
  CHECK_THROWS_AS(student_t_quantile(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(student_t_quantile(0.5, 5), std::invalid_argument);
}

TEST_CASE("two-sided t test acceptance") {
  const std::vector<double> window = {1.8, 1.9, 2.0, 2.1, 2.2, 1.9, 2.0, 2.1, 2.0, 2.0};
  CHECK(t_test_accepts(window, 2.0, 0.01));
  CHECK(t_test_accepts(window, 2.1, 0.01));   // |t| = 2.739 < 3.250
  CHECK(!t_test_accepts(window, 2.2, 0.01));  // |t| = 5.477 > 3.250

  CHECK(!t_test_accepts({}, 0.0, 0.05));
  CHECK(!t_test_accepts({1.0}, 1.0, 0.05));
  CHECK(t_test_accepts({2.0, 2.0, 2.0}, 2.0, 0.05));
  CHECK(!t_test_accepts({2.0, 2.0, 2.0}, 2.0001, 0.05));
}
