#pragma once

// The locally largest cycle: the distinguished cycle obtained by following,
// at every split, the child of larger perimeter. Its perimeter is a Markov
// chain on the nonnegative integers with the LlcKernel transition rows,
// absorbed at 0. Realizable two ways, which must agree in law: directly from
// the kernel rows, or through the layered single-cycle exploration that
// keeps the larger child and discards the smaller one (its filling is an
// independent Boltzmann triangulation, so discarding is lawful).

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "trigf/kernel.hpp"
#include "trigf/layers.hpp"

namespace trigf {

class LlcKernelCache {
 public:
  explicit LlcKernelCache(const WeightTable& w,
                          OddSplitRule rule = OddSplitRule::AsPrinted,
                          size_t max_entries = 8192)
      : w_(w), rule_(rule), max_entries_(max_entries) {}

  const LlcKernel& row(int p);
  const WeightTable& weights() const { return w_; }

 private:
  const WeightTable& w_;
  OddSplitRule rule_;
  size_t max_entries_;
  std::list<LlcKernel> lru_;
  std::unordered_map<int, std::list<LlcKernel>::iterator> index_;
};

struct LlcPath {
  int p0 = 0;
  std::vector<int> values;  // chain values from step 0
  std::optional<size_t> absorbed_at;
  bool capped = false;
};

// Kernel-driven chain until absorption or the step cap (default 64 p0^{3/2}).
LlcPath simulate_llc(int p0, uint64_t stream_key, LlcKernelCache& kernels,
                     uint64_t step_cap = 0);

// Chain value after exactly n steps (0 once absorbed); O(1) memory.
int llc_value_after(int p0, uint64_t n, uint64_t stream_key, LlcKernelCache& kernels);

struct LlcHeightPath {
  int p0 = 0;
  std::vector<int> values;  // values[r] = perimeter at height r; values[0] = p0
  bool absorbed = false;    // hole closed (value 0 beyond the recorded range)
  bool capped = false;
};

// Engine-driven locally largest cycle at heights: peel by layers, keep the
// larger child. Records the perimeter each time the base height advances.
LlcHeightPath llc_at_heights(int p0, uint64_t stream_key, StepLawCache& laws,
                             int max_height = -1, uint64_t step_cap = 0);

// Engine-driven chain value after n peeling steps of the single-cycle
// exploration (for distributional comparison against llc_value_after).
int llc_engine_value_after(int p0, uint64_t n, uint64_t stream_key,
                           StepLawCache& laws);

// Exact one-step drift of f along the kernel row: sum_q b(p,q) f(q) - f(p).
// Nonpositive for every p (f is a supermartingale for the chain).
double llc_f_drift(int p, const WeightTable& w,
                   OddSplitRule rule = OddSplitRule::AsPrinted);

// max over p in [p_lo, p_hi] of f_drift(p) / f(p).
double llc_max_relative_f_drift(int p_lo, int p_hi, const WeightTable& w,
                                OddSplitRule rule = OddSplitRule::AsPrinted);

}  // namespace trigf
