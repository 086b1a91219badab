#include "trigf/llc.hpp"

#include <cmath>
#include <stdexcept>

namespace trigf {

const LlcKernel& LlcKernelCache::row(int p) {
  auto it = index_.find(p);
  if (it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return *it->second;
  }
  lru_.emplace_front(p, w_, rule_);
  index_[p] = lru_.begin();
  if (lru_.size() > max_entries_) {
    index_.erase(lru_.back().perimeter());
    lru_.pop_back();
  }
  return lru_.front();
}

namespace {

uint64_t default_cap(int p0, uint64_t cap) {
  if (cap > 0) return cap;
  return static_cast<uint64_t>(64.0 * std::pow(static_cast<double>(p0), 1.5)) + 64;
}

}  // namespace

LlcPath simulate_llc(int p0, uint64_t stream_key, LlcKernelCache& kernels,
                     uint64_t step_cap) {
  if (p0 < 1) throw std::invalid_argument("simulate_llc: p0 < 1");
  uint64_t cap = default_cap(p0, step_cap);
  RandomStream rs(stream_key);
  LlcPath path;
  path.p0 = p0;
  path.values.push_back(p0);
  int p = p0;
  for (uint64_t n = 1; p != 0; ++n) {
    if (n > cap) {
      path.capped = true;
      break;
    }
    p = kernels.row(p).sample(rs);
    path.values.push_back(p);
    if (p == 0) path.absorbed_at = path.values.size() - 1;
  }
  return path;
}

int llc_value_after(int p0, uint64_t n, uint64_t stream_key, LlcKernelCache& kernels) {
  if (p0 < 1) throw std::invalid_argument("llc_value_after: p0 < 1");
  RandomStream rs(stream_key);
  int p = p0;
  for (uint64_t i = 0; i < n && p != 0; ++i) p = kernels.row(p).sample(rs);
  return p;
}

namespace {

// Single-cycle layered peeling that keeps the larger split child. The
// smaller child's hole is an independent Boltzmann triangulation, so
// dropping it does not change the law of the followed cycle.
template <typename OnAdvance>
bool follow_largest(int p0, uint64_t stream_key, StepLawCache& laws,
                    uint64_t step_cap, uint64_t max_steps_by_height,
                    OnAdvance&& on_advance, bool* capped) {
  CycleState s{p0, 0, 0};
  RandomStream rs(stream_key);
  uint64_t steps = 0;
  (void)max_steps_by_height;
  for (;;) {
    if (s.layer_complete()) {
      s.advance_layer();
      if (!on_advance(s)) return false;  // height limit reached
    }
    if (++steps > step_cap) {
      if (capped) *capped = true;
      return false;
    }
    PeelEvent e = laws.sample(s.perimeter, rs);
    switch (e.kind) {
      case PeelEvent::Kind::C:
        s = s.after_c();
        break;
      case PeelEvent::Kind::V:
        return true;  // absorbed
      case PeelEvent::Kind::Split: {
        auto halves = s.split(e.k);
        s = halves.first.perimeter >= halves.second.perimeter ? halves.first
                                                              : halves.second;
        break;
      }
    }
  }
}

}  // namespace

LlcHeightPath llc_at_heights(int p0, uint64_t stream_key, StepLawCache& laws,
                             int max_height, uint64_t step_cap) {
  if (p0 < 1) throw std::invalid_argument("llc_at_heights: p0 < 1");
  int hmax = max_height >= 0 ? max_height
                             : static_cast<int>(std::ceil(64.0 * std::sqrt(p0)));
  LlcHeightPath path;
  path.p0 = p0;
  path.values.push_back(p0);
  bool capped = false;
  path.absorbed = follow_largest(
      p0, stream_key, laws, default_cap(p0, step_cap), 0,
      [&](const CycleState& s) {
        path.values.push_back(s.perimeter);
        return s.base_height < hmax;
      },
      &capped);
  path.capped = capped;
  return path;
}

int llc_engine_value_after(int p0, uint64_t n, uint64_t stream_key,
                           StepLawCache& laws) {
  if (p0 < 1) throw std::invalid_argument("llc_engine_value_after: p0 < 1");
  CycleState s{p0, 0, 0};
  RandomStream rs(stream_key);
  for (uint64_t i = 0; i < n; ++i) {
    if (s.layer_complete()) s.advance_layer();
    PeelEvent e = laws.sample(s.perimeter, rs);
    switch (e.kind) {
      case PeelEvent::Kind::C:
        s = s.after_c();
        break;
      case PeelEvent::Kind::V:
        return 0;
      case PeelEvent::Kind::Split: {
        auto halves = s.split(e.k);
        s = halves.first.perimeter >= halves.second.perimeter ? halves.first
                                                              : halves.second;
        break;
      }
    }
  }
  return s.perimeter;
}

double llc_f_drift(int p, const WeightTable& w, OddSplitRule rule) {
  return LlcKernel(p, w, rule).f_drift(w);
}

double llc_max_relative_f_drift(int p_lo, int p_hi, const WeightTable& w,
                                OddSplitRule rule) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int p = p_lo; p <= p_hi; ++p) {
    worst = std::max(worst, llc_f_drift(p, w, rule) / w.f(p));
  }
  return worst;
}

}  // namespace trigf
