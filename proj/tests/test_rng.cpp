#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "trigf/rng.hpp"

using namespace trigf;

TEST_CASE("philox4x32-10 known-answer vector") {
  // Reference vector from the Random123 distribution: zero key, zero counter.
  auto out = philox::block(0, 0);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("blocks differ across counters and keys") {
  std::set<uint32_t> seen;
  for (uint64_t c = 0; c < 64; ++c) {
    auto b = philox::block(42, c);
    for (auto v : b) seen.insert(v);
  }
  CHECK(seen.size() == 256);
  CHECK(philox::block(1, 0) != philox::block(2, 0));
}

TEST_CASE("streams are reproducible and key-separated") {
  RandomStream a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && (x == y);
    any_diff = any_diff || (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform moments") {
  RandomStream rs(7);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double u = rs.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
  CHECK(std::fabs(var - 1.0 / 12.0) < 4e-3);
}

TEST_CASE("normal moments") {
  RandomStream rs(11);
  const int n = 200000;
  double s = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    double x = rs.next_normal();
    s += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  CHECK(std::fabs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
  CHECK(std::fabs(s3 / n) < 0.05);
}

TEST_CASE("poisson mean and variance, small and large rate") {
  for (double lambda : {0.5, 3.0, 25.0, 1000.0, 250000.0}) {
    RandomStream rs(1000 + static_cast<uint64_t>(lambda));
    const int n = lambda > 1000 ? 2000 : 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      double k = static_cast<double>(rs.next_poisson(lambda));
      s += k;
      s2 += k * k;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    double se_mean = std::sqrt(lambda / n);
    CHECK(std::fabs(mean - lambda) < 5.0 * se_mean);
    CHECK(std::fabs(var / lambda - 1.0) < 0.2);
  }
}

TEST_CASE("derive_key separates children") {
  uint64_t k = derive_key(99, salt::kSample);
  CHECK(derive_key(k, salt::kChildBase + 1) != derive_key(k, salt::kChildBase + 2));
  CHECK(derive_key(k, salt::kFill) != derive_key(k, salt::kStub));
}
