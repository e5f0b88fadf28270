#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sns/stats.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace sns;

TEST_CASE("compensated summation") {
  const std::vector<double> xs = {1.0, 1e100, 1.0, -1e100};
  CHECK(neumaier_sum(xs) == 2.0);

  std::vector<double> tenths(1000, 0.1);
  CHECK(std::abs(neumaier_sum(tenths) - 100.0) <= 1e-13);
  CHECK(neumaier_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("mean estimate") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const Estimate e = mean_estimate(xs);
  CHECK(e.mean == 2.5);
  // Sample variance 5/3, stderr sqrt(5/12).
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-15));
  CHECK(e.n == 4);
  CHECK(e.ci_lo == doctest::Approx(2.5 - 1.96 * e.std_error));
  CHECK(e.ci_hi == doctest::Approx(2.5 + 1.96 * e.std_error));

  const std::vector<double> flat(7, 0.1);
  const Estimate c = mean_estimate(flat);
  CHECK(c.mean == 0.1);
  CHECK(c.std_error == 0.0);

  CHECK_THROWS_AS(mean_estimate(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("log-sum-exp") {
  const std::vector<double> xs = {0.1, -2.0, 1.5};
  double naive = 0.0;
  for (double x : xs) naive += std::exp(x);
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(naive)).epsilon(1e-15));
  CHECK(log_mean_exp(xs) == doctest::Approx(std::log(naive / 3.0)).epsilon(1e-15));

  // exp(1000) overflows; the log-space result does not.
  const std::vector<double> big = {1000.0, 1000.0};
  CHECK(log_mean_exp(big) == 1000.0);
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));

  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> with_zero = {ninf, std::log(2.0)};
  CHECK(log_mean_exp(with_zero) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(log_sum_exp(std::vector<double>{}) == ninf);
  CHECK(log_mean_exp(std::vector<double>(3, ninf)) == ninf);

  const std::vector<double> flat(9, -3.25);
  CHECK(log_mean_exp(flat) == -3.25);
}

TEST_CASE("bootstrap interval for a log mean") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> xs(2000);
  for (double& x : xs) x = g(rng);
  const LogMeanEstimate e = log_mean_exp_estimate(xs, 200, 11);
  CHECK(e.n == 2000);
  CHECK(e.log_ci_lo < e.log_mean);
  CHECK(e.log_mean < e.log_ci_hi);
  // E exp(N(0,1)) = e^{1/2}.
  CHECK(std::abs(e.log_mean - 0.5) < 0.15);
  CHECK(e.relative_std_error > 0.0);

  const LogMeanEstimate again = log_mean_exp_estimate(xs, 200, 11);
  CHECK(again.log_ci_lo == e.log_ci_lo);
  CHECK(again.log_ci_hi == e.log_ci_hi);

  const std::vector<double> zeros(10, 0.0);
  const LogMeanEstimate z = log_mean_exp_estimate(zeros, 50, 1);
  CHECK(z.log_mean == 0.0);
  CHECK(z.relative_std_error == 0.0);
  CHECK(z.log_ci_lo == 0.0);
  CHECK(z.log_ci_hi == 0.0);
}

TEST_CASE("effective sample size") {
  CHECK(effective_sample_size(std::vector<double>(50, 0.3)) == doctest::Approx(50.0));
  std::vector<double> one(20, 0.0);
  one[7] = 4.0;
  CHECK(effective_sample_size(one) == 1.0);
  CHECK(effective_sample_size(std::vector<double>(5, 0.0)) == 0.0);
}
