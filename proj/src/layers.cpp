#include "trigf/layers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "trigf/stats.hpp"

namespace trigf {

// ---------------------------------------------------------------------------
// MarkedCycle
// ---------------------------------------------------------------------------

int MarkedCycle::raised_count() const {
  int t = 0;
  for (uint8_t m : marks) t += m;
  return t;
}

bool MarkedCycle::property_p_holds() const {
  int p = perimeter();
  if (p == 0) return false;
  int falls = 0;  // raised -> base transitions around the cycle
  for (int i = 0; i < p; ++i) {
    if (marks[static_cast<size_t>(i)] && !marks[static_cast<size_t>((i + 1) % p)]) ++falls;
  }
  return falls <= 1;
}

MarkedCycle::PeelEdge MarkedCycle::select_peel_edge() const {
  int p = perimeter();
  int t = raised_count();
  if (t == p) return {true, -1};
  if (t == 0) return {false, 0};
  for (int i = 0; i < p; ++i) {
    if (marks[static_cast<size_t>(i)] && !marks[static_cast<size_t>((i + 1) % p)]) {
      return {false, i};
    }
  }
  throw std::logic_error("MarkedCycle: property (P) violated");
}

std::vector<MarkedCycle> MarkedCycle::apply_event(const PeelEvent& e) const {
  int p = perimeter();
  PeelEdge edge = select_peel_edge();
  if (edge.layer_complete) throw std::logic_error("apply_event on a complete layer");
  int i = edge.index;
  switch (e.kind) {
    case PeelEvent::Kind::C: {
      // The new vertex is adjacent to a height-r vertex and interior to the
      // hole, hence at height r+1.
      MarkedCycle c = *this;
      c.marks.insert(c.marks.begin() + i + 1, 1);
      if (!c.property_p_holds()) throw std::logic_error("event C broke property (P)");
      return {c};
    }
    case PeelEvent::Kind::V: {
      if (p != 2) throw std::logic_error("event V requires perimeter 2");
      return {};
    }
    case PeelEvent::Kind::Split: {
      if (e.k < 0 || e.k >= p) throw std::logic_error("split index out of range");
      // Third vertex W sits k edges clockwise from the peeled edge; the two
      // new cycles share it.
      MarkedCycle a, b;
      a.base_height = b.base_height = base_height;
      a.marks.reserve(static_cast<size_t>(e.k) + 1);
      for (int s = 0; s <= e.k; ++s) {
        a.marks.push_back(marks[static_cast<size_t>((i + 1 + s) % p)]);
      }
      b.marks.reserve(static_cast<size_t>(p - e.k));
      for (int s = 0; s <= p - 1 - e.k; ++s) {
        b.marks.push_back(marks[static_cast<size_t>((i + 1 + e.k + s) % p)]);
      }
      if (!a.property_p_holds() || !b.property_p_holds()) {
        throw std::logic_error("split broke property (P)");
      }
      return {a, b};
    }
  }
  throw std::logic_error("unreachable");
}

void MarkedCycle::advance_layer() {
  if (raised_count() != perimeter()) throw std::logic_error("layer not complete");
  ++base_height;
  std::fill(marks.begin(), marks.end(), 0);
}

// ---------------------------------------------------------------------------
// CycleState
// ---------------------------------------------------------------------------

std::pair<CycleState, CycleState> CycleState::split(int k) const {
  if (k < 0 || k >= perimeter) throw std::logic_error("split index out of range");
  int p = perimeter, t = raised;
  if (t + k <= p - 1) {
    return {{k + 1, 0, base_height}, {p - k, t, base_height}};
  }
  return {{k + 1, t + k - p + 1, base_height}, {p - k, p - k, base_height}};
}

// ---------------------------------------------------------------------------
// Exploration engine
// ---------------------------------------------------------------------------

namespace {

struct LiveCycle {
  CycleState state;
  RandomStream rng;
  uint64_t stream_key = 0;
  uint32_t id = 0;
  uint32_t next_child = 0;
  bool lost = false;
};

class Engine {
 public:
  Engine(int p0, const ExploreConfig& cfg, uint64_t sample_key, StepLawCache& laws)
      : cfg_(cfg), laws_(laws) {
    freeze_below_ = cfg.cutoff_fraction > 0.0 ? cfg.cutoff_fraction * p0 : 0.0;
    max_height_ = cfg.max_height >= 0
                      ? cfg.max_height
                      : static_cast<int>(std::ceil(32.0 * std::sqrt(p0)));
    wanted_ = cfg.snapshot_heights;
    std::sort(wanted_.begin(), wanted_.end());
    trace_.p0 = p0;
    trace_.genealogy.push_back({0, 0, 0, 0, p0});
    root_.state = {p0, 0, 0};
    root_.stream_key = sample_key;
    root_.rng = RandomStream(sample_key);
    record_snapshot(0, p0, false);
  }

  ExplorationTrace run() {
    if (cfg_.synchronized || cfg_.martingale_paths) {
      run_synchronized();
    } else {
      run_depth_first();
    }
    trace_.sort_snapshots();
    return std::move(trace_);
  }

 private:
  void record_snapshot(int r, int perimeter, bool lost) {
    if (!cfg_.record_snapshots) return;
    if (!wanted_.empty() && !std::binary_search(wanted_.begin(), wanted_.end(), r)) {
      return;
    }
    auto& bin = lost ? trace_.lost_snapshots[r] : trace_.snapshots[r];
    bin.push_back(perimeter);
  }

  // Completed layer: advance the base and log the ball appearance.
  void advance(LiveCycle& c) {
    c.state.advance_layer();
    if (!c.lost) {
      trace_.max_layer = std::max(trace_.max_layer, c.state.base_height);
    }
    record_snapshot(c.state.base_height, c.state.perimeter, c.lost);
  }

  // Freeze rule for a cycle created by a split (the root's initial state is
  // exempt: the exploration must start). Returns true if the cycle froze.
  bool maybe_freeze(LiveCycle& c) {
    if (freeze_below_ <= 0.0 || c.lost) return false;
    if (static_cast<double>(c.state.perimeter) >= freeze_below_) return false;
    int min_height = c.state.base_height + (c.state.layer_complete() ? 1 : 0);
    trace_.frozen.push_back({c.id, c.state.perimeter, min_height, c.stream_key});
    frozen_perims_.push_back(c.state.perimeter);
    c.lost = true;  // meaningful when lost-tracking keeps it alive
    return true;
  }

  // Handles a newborn (or post-split continuing) cycle: freeze rule, layer
  // normalization and snapshot. Returns false when the cycle stops existing
  // for the exploration (frozen without lost-tracking).
  bool settle(LiveCycle& c) {
    bool froze = maybe_freeze(c);
    if (froze && !cfg_.track_lost) return false;
    if (c.state.layer_complete()) advance(c);
    return true;
  }

  bool budget_ok() {
    if (trace_.steps >= cfg_.step_budget) {
      trace_.complete = false;
      return false;
    }
    ++trace_.steps;
    return true;
  }

  // One peeling step on a cycle whose layer is not complete. Returns false
  // when the cycle stops existing as a schedulable unit (death, freeze
  // without tracking, budget stop); newborn cycles are appended to
  // `children`.
  bool peel_once(LiveCycle& c, std::deque<LiveCycle>& children) {
    if (!budget_ok()) return false;
    PeelEvent e = laws_.sample(c.state.perimeter, c.rng);
    switch (e.kind) {
      case PeelEvent::Kind::C: {
        c.state = c.state.after_c();
        if (c.lost) {
          ++trace_.lost_volume;
        } else {
          ++trace_.volume;
          trace_.max_vertex_height =
              std::max(trace_.max_vertex_height, c.state.base_height + 1);
        }
        return true;
      }
      case PeelEvent::Kind::V:
        return false;
      case PeelEvent::Kind::Split: {
        auto halves = c.state.split(e.k);
        bool first_continues = halves.first.perimeter >= halves.second.perimeter;
        CycleState cont = first_continues ? halves.first : halves.second;
        CycleState fresh = first_continues ? halves.second : halves.first;

        ++c.next_child;
        LiveCycle nc;
        nc.state = fresh;
        nc.stream_key = derive_key(c.stream_key, salt::kChildBase + c.next_child);
        nc.rng = RandomStream(nc.stream_key);
        nc.lost = c.lost;
        nc.id = next_id_++;
        if (cfg_.record_genealogy) {
          int bh = fresh.base_height + (fresh.layer_complete() ? 1 : 0);
          trace_.genealogy.push_back({nc.id, c.id, c.next_child, bh, fresh.perimeter});
        }
        if (settle(nc)) children.push_back(std::move(nc));

        c.state = cont;
        return settle(c);
      }
    }
    return false;
  }

  void run_depth_first() {
    std::vector<LiveCycle> pending;
    pending.push_back(std::move(root_));
    std::deque<LiveCycle> children;
    while (!pending.empty() && trace_.complete) {
      LiveCycle c = std::move(pending.back());
      pending.pop_back();
      bool alive = true;
      while (alive && trace_.complete) {
        if (c.state.layer_complete()) advance(c);
        if (c.state.base_height >= max_height_) break;  // halted at the cap
        alive = peel_once(c, children);
      }
      while (!children.empty()) {
        if (children.back().state.base_height < max_height_) {
          pending.push_back(std::move(children.back()));
        }
        children.pop_back();
      }
    }
  }

  void run_synchronized() {
    const WeightTable& w = laws_.weights();
    std::deque<LiveCycle> current;
    current.push_back(std::move(root_));
    int r = 0;
    while (true) {
      if (cfg_.martingale_paths) {
        KahanSum m, v;
        for (const LiveCycle& c : current) {
          if (c.lost) continue;
          m.add(w.f(c.state.perimeter));
          v.add(w.g(c.state.perimeter));
        }
        for (int fp : frozen_perims_) {
          m.add(w.f(fp));
          v.add(w.g(fp));
        }
        trace_.m_path.push_back(m.value());
        trace_.v_path.push_back(static_cast<double>(trace_.volume) + v.value());
      }
      if (current.empty() || r >= max_height_ || !trace_.complete) break;
      std::deque<LiveCycle> next;
      std::deque<LiveCycle> work = std::move(current);
      current.clear();
      std::deque<LiveCycle> children;
      while (!work.empty() && trace_.complete) {
        LiveCycle c = std::move(work.front());
        work.pop_front();
        bool alive = true;
        while (alive && trace_.complete) {
          if (c.state.layer_complete()) advance(c);
          if (c.state.base_height > r) break;  // advanced: waits for theta
          alive = peel_once(c, children);
          while (!children.empty()) {
            LiveCycle nc = std::move(children.front());
            children.pop_front();
            if (nc.state.base_height == r) {
              work.push_back(std::move(nc));
            } else {
              next.push_back(std::move(nc));
            }
          }
        }
        if (alive && c.state.base_height > r) next.push_back(std::move(c));
      }
      current = std::move(next);
      ++r;
    }
  }

  const ExploreConfig& cfg_;
  StepLawCache& laws_;
  double freeze_below_ = 0.0;
  int max_height_ = 0;
  std::vector<int> wanted_;
  std::vector<int> frozen_perims_;
  uint32_t next_id_ = 1;
  LiveCycle root_;
  ExplorationTrace trace_;
};

}  // namespace

ExplorationTrace explore(int p0, const ExploreConfig& config, uint64_t sample_key,
                         StepLawCache& laws) {
  if (p0 < 1) throw std::invalid_argument("explore: p0 < 1");
  Engine engine(p0, config, sample_key, laws);
  return engine.run();
}

void ExplorationTrace::sort_snapshots() {
  for (auto& [r, v] : snapshots) std::sort(v.begin(), v.end(), std::greater<>());
  for (auto& [r, v] : lost_snapshots) std::sort(v.begin(), v.end(), std::greater<>());
}

double ExplorationTrace::lost_mass() const {
  double sup = 0.0;
  double scale = static_cast<double>(p0);
  for (const auto& [r, v] : lost_snapshots) {
    KahanSum s;
    for (int l : v) {
      double x = static_cast<double>(l) / scale;
      s.add(x * x * x);
    }
    sup = std::max(sup, s.value());
  }
  return sup;
}

std::string genealogy_label(const std::vector<GenealogyEntry>& g, uint32_t id) {
  std::vector<uint32_t> ranks;
  uint32_t cur = id;
  while (cur != 0) {
    const GenealogyEntry* e = nullptr;
    for (const auto& ge : g) {
      if (ge.id == cur) {
        e = &ge;
        break;
      }
    }
    if (!e) throw std::out_of_range("genealogy_label: unknown id");
    ranks.push_back(e->child_rank);
    cur = e->parent;
  }
  std::string label = "0";
  for (auto it = ranks.rbegin(); it != ranks.rend(); ++it) {
    label += "." + std::to_string(*it);
  }
  return label;
}

}  // namespace trigf
