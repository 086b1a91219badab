#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trigf/stats.hpp"

using namespace trigf;

TEST_CASE("kahan sum survives cancellation") {
  KahanSum s;
  s.add(1.0);
  for (int i = 0; i < 1000000; ++i) s.add(1e-16);
  CHECK(s.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-12));
}

TEST_CASE("log_sum_exp") {
  std::vector<double> logs = {std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(logs) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  std::vector<double> big = {1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("mean accumulator") {
  MeanAccumulator m;
  for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
  CHECK(m.mean() == doctest::Approx(2.5));
  CHECK(m.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(m.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("ks two-sample basics") {
  std::vector<double> a = {1, 2, 3, 4, 5};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  std::vector<double> lo = {1, 2, 3}, hi = {10, 11, 12};
  CHECK(ks_two_sample(lo, hi).statistic == 1.0);
  // Hand case: a = {1,2}, b = {1,3}: ECDF gap peaks at 1/2 on [2,3).
  CHECK(ks_two_sample({1, 2}, {1, 3}).statistic == doctest::Approx(0.5));
}

TEST_CASE("ks handles ties / atoms") {
  std::vector<double> a(100, 0.0), b(100, 0.0);
  for (int i = 0; i < 50; ++i) a[static_cast<size_t>(i)] = 1.0;
  for (int i = 0; i < 60; ++i) b[static_cast<size_t>(i)] = 1.0;
  CHECK(ks_two_sample(a, b).statistic == doctest::Approx(0.1));
}

TEST_CASE("ks critical value scale") {
  // c(0.01) = 1.6276; equal n = m = 5000 -> D* = c * sqrt(2/n).
  std::vector<double> a(5000), b(5000);
  for (int i = 0; i < 5000; ++i) a[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] = i;
  auto r = ks_two_sample(a, b);
  CHECK(r.critical_1pct == doctest::Approx(1.6276 * std::sqrt(2.0 / 5000.0)).epsilon(1e-3));
}

TEST_CASE("median estimate") {
  std::vector<double> xs;
  for (int i = 1; i <= 1001; ++i) xs.push_back(i);
  auto m = median_estimate(xs);
  CHECK(m.median == 501);
  CHECK(m.std_error > 0);
  CHECK(m.std_error < 30);
}
