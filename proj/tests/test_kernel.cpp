#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "trigf/gf.hpp"
#include "trigf/kernel.hpp"
#include "trigf/stats.hpp"

using namespace trigf;

namespace {
const WeightTable& table() {
  static WeightTable w(20000);
  return w;
}
}  // namespace

TEST_CASE("step law at p = 2") {
  auto m = step_law_masses(2, table());
  CHECK(m.prob_c == doctest::Approx(0.09622504486493763).epsilon(1e-13));
  CHECK(m.prob_g[0] == doctest::Approx(0.06698729810778068).epsilon(1e-13));
  CHECK(m.prob_g[1] == doctest::Approx(0.06698729810778068).epsilon(1e-13));
  CHECK(m.prob_v == doctest::Approx(0.76980035891950102).epsilon(1e-13));
  CHECK(m.total() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("step law at p = 1") {
  auto m = step_law_masses(1, table());
  CHECK(m.prob_c == doctest::Approx(0.93301270189221932).epsilon(1e-13));
  CHECK(m.prob_g[0] == doctest::Approx(0.06698729810778068).epsilon(1e-13));
  CHECK(m.prob_v == 0.0);
}

TEST_CASE("normalization and symmetry across perimeters") {
  for (int p : {1, 2, 3, 5, 8, 13, 100, 999, 4096, 9999}) {
    auto m = step_law_masses(p, table());
    REQUIRE(std::fabs(m.total() - 1.0) <= 1e-10);
    for (int k = 0; k < p; ++k) {
      REQUIRE(m.prob_g[static_cast<size_t>(k)] ==
              m.prob_g[static_cast<size_t>(p - 1 - k)]);
    }
  }
}

TEST_CASE("event order contract: first mass is C, last is V") {
  StepLaw law(2, table());
  CHECK(law.event_at(0.0, false).kind == PeelEvent::Kind::C);
  CHECK(law.event_at(0.9999, false).kind == PeelEvent::Kind::V);
  StepLaw law5(5, table());
  CHECK(law5.event_at(0.0, false).kind == PeelEvent::Kind::C);
  auto last = law5.event_at(0.999999999, false);
  CHECK(last.kind == PeelEvent::Kind::Split);
}

TEST_CASE("sampling frequencies match the masses at p = 10") {
  const int n = 1000000;
  StepLaw law(10, table());
  auto masses = step_law_masses(10, table());
  RandomStream rs(2024);
  double count_c = 0;
  std::map<int, double> count_g;
  for (int i = 0; i < n; ++i) {
    PeelEvent e = law.sample(rs);
    if (e.kind == PeelEvent::Kind::C) {
      ++count_c;
    } else {
      ++count_g[e.k];
    }
  }
  auto within4 = [&](double freq, double prob) {
    return std::fabs(freq / n - prob) <= 4.0 * std::sqrt(prob * (1 - prob) / n);
  };
  CHECK(within4(count_c, masses.prob_c));
  for (int k = 0; k < 10; ++k) {
    REQUIRE(within4(count_g[k], masses.prob_g[static_cast<size_t>(k)]));
  }
}

TEST_CASE("walk sampler above the cache threshold agrees with the law") {
  StepLawCache cached(table(), 64, 1 << 16);
  StepLawCache walking(table(), 64, /*cache_threshold=*/8);
  RandomStream r1(555), r2(555);
  for (int i = 0; i < 20000; ++i) {
    PeelEvent a = cached.sample(97, r1);
    PeelEvent b = walking.sample(97, r2);
    REQUIRE(a.kind == b.kind);
    REQUIRE(a.k == b.k);
  }
}

TEST_CASE("half-plane probabilities and drift identities") {
  const auto& w = table();
  CHECK(half_plane_prob(-1, w) == doctest::Approx(0.57735026918962576).epsilon(1e-15));
  CHECK(half_plane_prob(0, w) == doctest::Approx(0.06698729810778068).epsilon(1e-13));
  auto h = half_plane_identities(w, 10000, 15000);
  CHECK(std::fabs(h.sum_q - 0.21132486540518712) <= 1e-8);
  CHECK(std::fabs(h.residual_mass) <= 1e-6);
  auto h2 = half_plane_identities(WeightTable(120000), 50000, 100000);
  CHECK(std::fabs(h2.residual_drift) <= 1e-6);
}

TEST_CASE("locally largest kernel rows") {
  const auto& w = table();
  LlcKernel row3(3, w);
  std::map<int, double> r;
  for (auto [q, mass] : row3.row()) r[q] += mass;
  CHECK(r[4] == doctest::Approx(0.21650635094610966).epsilon(1e-13));
  CHECK(r[3] == doctest::Approx(0.13397459621556135).epsilon(1e-13));
  CHECK(r[1] == doctest::Approx(0.64951905283832899).epsilon(1e-13));
  CHECK(row3.row_sum() == doctest::Approx(1.0).epsilon(1e-14));

  LlcKernel row2(2, w);
  std::map<int, double> r2;
  for (auto [q, mass] : row2.row()) r2[q] += mass;
  CHECK(r2[0] == doctest::Approx(0.76980035891950102).epsilon(1e-13));

  LlcKernel prose(3, w, OddSplitRule::LargerChild);
  std::map<int, double> rp;
  for (auto [q, mass] : prose.row()) rp[q] += mass;
  CHECK(rp[2] == doctest::Approx(0.64951905283832899).epsilon(1e-13));
  CHECK(rp.count(1) == 0);

  for (int p = 1; p <= 2000; ++p) {
    REQUIRE(std::fabs(LlcKernel(p, w).row_sum() - 1.0) <= 1e-10);
  }
}

TEST_CASE("kernel log-moment approaches the continuum integral") {
  // p^{3/2} sum ln(q/p)^2 b(p,q) -> 2 t int ln(x)^2 nu(dx), quadrature value
  // computed at run time by the continuum module.
  const auto& w = table();
  double target = 2.0 * ModelConstants::get().t_triangle * nu_log_second_moment();
  double got = LlcKernel(1000, w).log_second_moment();
  CHECK(got / target > 0.9);
  CHECK(got / target < 1.1);
}

TEST_CASE("uipt reweighted law") {
  const auto& w = table();
  for (int p = 1; p <= 100; ++p) {
    UiptStepLaw law(p, w);
    REQUIRE(std::fabs(law.total() - 1.0) <= 1e-10);
    REQUIRE(law.prob_v() == 0.0);
  }
  UiptStepLaw law5(5, w);
  // child selection proportional to f
  double p0 = law5.child_one_prob(0);  // children (1, 5)
  CHECK(p0 == doctest::Approx(w.f(1) / (w.f(1) + w.f(5))).epsilon(1e-15));
}

TEST_CASE("fair-coin spine estimator has unit mean") {
  // E[ f(L_n) 2^{#splits} / f(p) ] = 1: the h-transform identity sampled
  // under the plain Boltzmann law with coin-flip child selection.
  const auto& w = table();
  const int p0 = 10, steps = 5, n = 200000;
  StepLawCache laws(w);
  MeanAccumulator acc;
  for (int i = 0; i < n; ++i) {
    RandomStream rs(derive_key(77, static_cast<uint64_t>(i)));
    int p = p0;
    double weight = 1.0;
    for (int s = 0; s < steps && p > 0; ++s) {
      PeelEvent e = laws.sample(p, rs);
      if (e.kind == PeelEvent::Kind::C) {
        p += 1;
      } else if (e.kind == PeelEvent::Kind::V) {
        p = 0;
      } else {
        weight *= 2.0;
        p = rs.next_bit() ? e.k + 1 : p - e.k;
      }
    }
    acc.add(w.f(p) * weight / w.f(p0));
  }
  CHECK(std::fabs(acc.mean() - 1.0) <= 4.0 * acc.std_error());
}

TEST_CASE("lru cache keeps laws consistent") {
  StepLawCache cache(table(), 4);
  for (int p : {2, 3, 4, 5, 6, 7, 2, 3}) {
    const StepLaw& law = cache.law(p);
    REQUIRE(law.perimeter() == p);
    REQUIRE(law.total() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
