#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "trigf/layers.hpp"
#include "trigf/stats.hpp"

using namespace trigf;

namespace {
const WeightTable& table() {
  static WeightTable w(65540);
  return w;
}
StepLawCache& laws() {
  static StepLawCache c(table());
  return c;
}
}  // namespace

TEST_CASE("peel edge selection on the reference representation") {
  MarkedCycle fresh{{0, 0, 0}, 0};
  auto e = fresh.select_peel_edge();
  CHECK_FALSE(e.layer_complete);
  CHECK(e.index == 0);

  MarkedCycle mixed{{1, 1, 0, 0}, 0};
  e = mixed.select_peel_edge();
  CHECK_FALSE(e.layer_complete);
  CHECK(e.index == 1);  // the unique (raised, base) edge

  MarkedCycle done{{1, 1, 1}, 0};
  CHECK(done.select_peel_edge().layer_complete);
}

TEST_CASE("events on the reference representation") {
  MarkedCycle two{{1, 0}, 0};
  CHECK(two.apply_event(PeelEvent::v()).empty());

  MarkedCycle three{{0, 0, 0}, 0};
  auto kids = three.apply_event(PeelEvent::split(0));
  REQUIRE(kids.size() == 2);
  std::vector<int> per = {kids[0].perimeter(), kids[1].perimeter()};
  std::sort(per.begin(), per.end());
  CHECK(per[0] == 1);
  CHECK(per[1] == 3);

  MarkedCycle five{{1, 1, 0, 0, 0}, 2};
  auto grown = five.apply_event(PeelEvent::c());
  REQUIRE(grown.size() == 1);
  CHECK(grown[0].perimeter() == 6);
  CHECK(grown[0].raised_count() == 3);

  CHECK_THROWS(three.apply_event(PeelEvent::v()));
  CHECK_THROWS(three.apply_event(PeelEvent::split(3)));
}

// Drives the compact state and the explicit-marks reference through the same
// event stream and requires identical (perimeter, raised, base) triples at
// every step, children compared in matching order. Property (P) is asserted
// by the reference on every mutation.
TEST_CASE("compact state is pathwise identical to the explicit marks") {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    int p0 = 1 + static_cast<int>(seed % 9);
    std::deque<std::pair<CycleState, MarkedCycle>> work;
    work.push_back({CycleState{p0, 0, 0}, MarkedCycle{std::vector<uint8_t>(p0, 0), 0}});
    RandomStream rs(derive_key(9000, seed));
    int steps = 0;
    while (!work.empty() && steps < 4000) {
      auto [cs, mc] = work.front();
      work.pop_front();
      for (;;) {
        REQUIRE(cs.perimeter == mc.perimeter());
        REQUIRE(cs.raised == mc.raised_count());
        REQUIRE(cs.base_height == mc.base_height);
        REQUIRE(mc.property_p_holds());
        if (cs.layer_complete()) {
          cs.advance_layer();
          mc.advance_layer();
        }
        REQUIRE(cs.layer_complete() == mc.select_peel_edge().layer_complete);
        if (++steps >= 4000) break;
        PeelEvent e = laws().sample(cs.perimeter, rs);
        auto kids = mc.apply_event(e);
        if (e.kind == PeelEvent::Kind::V) break;
        if (e.kind == PeelEvent::Kind::C) {
          cs = cs.after_c();
          mc = kids[0];
          continue;
        }
        auto halves = cs.split(e.k);
        // kids[0] contains the vertex after the peeled edge = halves.first
        REQUIRE(halves.first.perimeter == kids[0].perimeter());
        REQUIRE(halves.first.raised == kids[0].raised_count());
        REQUIRE(halves.second.perimeter == kids[1].perimeter());
        REQUIRE(halves.second.raised == kids[1].raised_count());
        REQUIRE(halves.first.perimeter + halves.second.perimeter ==
                cs.perimeter + 1);
        bool first_continues = halves.first.perimeter >= halves.second.perimeter;
        work.push_back(first_continues
                           ? std::make_pair(halves.second, kids[1])
                           : std::make_pair(halves.first, kids[0]));
        cs = first_continues ? halves.first : halves.second;
        mc = first_continues ? kids[0] : kids[1];
      }
    }
  }
}

TEST_CASE("exploring a 1-gon always finds an inner vertex") {
  ExploreConfig cfg;
  for (uint64_t seed = 0; seed < 25; ++seed) {
    auto tr = explore(1, cfg, derive_key(41, seed), laws());
    REQUIRE(tr.snapshots.at(0) == std::vector<int>{1});
    REQUIRE(tr.volume >= 1);
    REQUIRE(tr.complete);
    REQUIRE(tr.max_vertex_height >= 1);
  }
}

TEST_CASE("mean discovered volume matches g") {
  ExploreConfig cfg;
  cfg.record_snapshots = false;
  for (int p0 : {1, 2, 3}) {
    MeanAccumulator acc;
    for (uint64_t i = 0; i < 20000; ++i) {
      acc.add(static_cast<double>(
          explore(p0, cfg, derive_key(500 + p0, i), laws()).volume));
    }
    INFO("p0 = ", p0);
    CHECK(std::fabs(acc.mean() - table().g(p0)) <= 4.0 * acc.std_error());
  }
}

TEST_CASE("cutoff semantics: threshold strict, root exempt") {
  ExploreConfig cfg;
  cfg.cutoff_fraction = 1.0;  // threshold = p0; cycles freeze iff born below it
  auto tr = explore(10, cfg, 77, laws());
  for (const auto& f : tr.frozen) REQUIRE(f.perimeter < 10);

  // threshold 2 p0: every split child is born below it, so the exploration
  // runs exactly until the root's first split and freezes both children.
  ExploreConfig cfg2;
  cfg2.cutoff_fraction = 2.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto t2 = explore(10, cfg2, derive_key(88, seed), laws());
    REQUIRE(t2.frozen.size() == 2);
    REQUIRE(t2.frozen[0].perimeter + t2.frozen[1].perimeter >= 11);
  }
}

TEST_CASE("lost tracking collects the descendants of frozen cycles") {
  ExploreConfig cfg;
  cfg.cutoff_fraction = 2.0;
  cfg.track_lost = true;
  bool some_lost = false;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto tr = explore(10, cfg, derive_key(99, seed), laws());
    REQUIRE(tr.lost_snapshots.count(0) == 0);  // the root is never lost
    if (tr.lost_mass() > 0) some_lost = true;
    // without a cutoff there are no lost cycles at all
    ExploreConfig plain;
    auto t0 = explore(10, plain, derive_key(99, seed), laws());
    REQUIRE(t0.lost_mass() == 0.0);
  }
  CHECK(some_lost);
}

TEST_CASE("synchronized and depth-first schedules produce identical traces") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    ExploreConfig a, b;
    a.record_genealogy = b.record_genealogy = true;
    b.synchronized = true;
    int p0 = 2 + static_cast<int>(seed % 11);
    auto ta = explore(p0, a, derive_key(7000, seed), laws());
    auto tb = explore(p0, b, derive_key(7000, seed), laws());
    REQUIRE(ta.snapshots == tb.snapshots);
    REQUIRE(ta.volume == tb.volume);
    REQUIRE(ta.steps == tb.steps);
    REQUIRE(ta.max_layer == tb.max_layer);
    REQUIRE(ta.max_vertex_height == tb.max_vertex_height);
    // genealogy compared as label -> (birth height, perimeter) maps
    auto canon = [](const ExplorationTrace& t) {
      std::vector<std::tuple<std::string, int, int>> v;
      for (const auto& g : t.genealogy) {
        v.emplace_back(genealogy_label(t.genealogy, g.id), g.birth_height,
                       g.birth_perimeter);
      }
      std::sort(v.begin(), v.end());
      return v;
    };
    REQUIRE(canon(ta) == canon(tb));
  }
}

TEST_CASE("martingale paths start at f and g and stay flat in the mean") {
  ExploreConfig cfg;
  cfg.martingale_paths = true;
  cfg.max_height = 3;
  cfg.record_snapshots = true;
  const int p0 = 6;
  MeanAccumulator m2;
  for (uint64_t i = 0; i < 20000; ++i) {
    auto tr = explore(p0, cfg, derive_key(321, i), laws());
    REQUIRE(tr.m_path[0] == table().f(p0));
    REQUIRE(tr.v_path[0] == table().g(p0));
    // ball identity: M at theta_r equals the f-sum over the ball snapshot
    for (int r = 1; r < static_cast<int>(tr.m_path.size()); ++r) {
      KahanSum s;
      if (tr.snapshots.count(r)) {
        for (int l : tr.snapshots.at(r)) s.add(table().f(l));
      }
      REQUIRE(tr.m_path[static_cast<size_t>(r)] ==
              doctest::Approx(s.value()).epsilon(1e-12));
    }
    if (tr.m_path.size() > 2) m2.add(tr.m_path[2]);
  }
  CHECK(std::fabs(m2.mean() - table().f(p0)) <= 4.0 * m2.std_error());
}

TEST_CASE("explorations are deterministic in the sample key") {
  ExploreConfig cfg;
  cfg.record_genealogy = true;
  auto a = explore(7, cfg, 42424242, laws());
  auto b = explore(7, cfg, 42424242, laws());
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.volume == b.volume);
  CHECK(a.steps == b.steps);
  auto c = explore(7, cfg, 42424243, laws());
  CHECK(a.steps != c.steps);  // overwhelmingly likely
}

TEST_CASE("height budget halts the exploration") {
  ExploreConfig cfg;
  cfg.max_height = 2;
  auto tr = explore(50, cfg, 5, laws());
  CHECK(tr.max_layer <= 2);
  CHECK(tr.complete);
}
