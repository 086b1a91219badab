#pragma once

// One-step peeling transitions of a Boltzmann triangulation with boundary:
//
//   event C    (probability b_-1 = (12 sqrt3)^-1 Z(p+1)/Z(p))  new inner vertex
//   event G_k  (probability b_k  = Z(k+1) Z(p-k)/Z(p))         split into
//              cycles of perimeter k+1 and p-k, k counted clockwise from the
//              peeled edge
//   event V    (probability 1/Z(2), perimeter 2 only)          hole closes
//
// plus their half-plane limits q_k, the transition row of the locally
// largest cycle chain, and the f-reweighted (UIPT spine) law.
//
// Sampling order contract: events are enumerated as (C, G_0..G_{p-1}, V).
// The sampler draws one uniform over (C, symmetric pair {G_k, G_{p-1-k}}
// ascending in k, V) and one fair bit for the side of a strict pair, so C is
// always the first mass and V the last. Seeded runs are bit-reproducible.

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "trigf/rng.hpp"
#include "trigf/weights.hpp"

namespace trigf {

struct PeelEvent {
  enum class Kind { C, Split, V };
  Kind kind;
  int k = -1;  // valid for Split
  static PeelEvent c() { return {Kind::C}; }
  static PeelEvent split(int k) { return {Kind::Split, k}; }
  static PeelEvent v() { return {Kind::V}; }
};

// Exact masses of every event, for dumps, checks and tests.
struct StepMasses {
  int p = 0;
  double prob_c = 0.0;
  std::vector<double> prob_g;  // index k
  double prob_v = 0.0;
  double total() const;
};

StepMasses step_law_masses(int p, const WeightTable& w);

// Sampling form: pair-folded prefix sums.
class StepLaw {
 public:
  StepLaw(int p, const WeightTable& w);

  int perimeter() const { return p_; }
  double prob_c() const { return prob_c_; }
  double prob_v() const { return prob_v_; }
  double total() const { return total_; }
  size_t footprint() const { return cum_.size(); }

  PeelEvent sample(RandomStream& rs) const;

  // Deterministic mapping behind sample(): u01 selects (C, pair, V) through
  // the prefix sums, side picks G_k vs G_{p-1-k} within a strict pair.
  PeelEvent event_at(double u01, bool side) const;

 private:
  int p_;
  double prob_c_, prob_v_, total_;
  std::vector<double> cum_;  // cumulative over (C, pairs..., V)
};

// Per-worker LRU cache of step laws. Not thread-safe by design: each worker
// owns one (laws themselves are immutable). Perimeters above the threshold
// are sampled by a single cumulative walk without materializing a law.
class StepLawCache {
 public:
  explicit StepLawCache(const WeightTable& w, size_t max_entries = 8192,
                        int cache_threshold = 1 << 16)
      : w_(w), max_entries_(max_entries), threshold_(cache_threshold) {}

  PeelEvent sample(int p, RandomStream& rs);
  const StepLaw& law(int p);
  const WeightTable& weights() const { return w_; }

 private:
  const WeightTable& w_;
  size_t max_entries_;
  int threshold_;
  std::list<StepLaw> lru_;
  std::unordered_map<int, std::list<StepLaw>::iterator> index_;
};

// Half-plane (UIHPT) one-step probabilities: q_-1 = 1/sqrt3,
// q_k = 12^-k Z(k+1) for k >= 0.
double half_plane_prob(int k, const WeightTable& w);

struct HalfPlaneIdentities {
  double sum_q;        // sum_{k>=0} q_k, tail-corrected at K1
  double sum_kq;       // sum_{k>=0} k q_k, tail-corrected at K2
  double residual_mass;   // q_-1 + 2 sum q_k - 1
  double residual_drift;  // q_-1 - 2 sum k q_k
};

HalfPlaneIdentities half_plane_identities(const WeightTable& w, int K1 = 50000,
                                          int K2 = 100000);

// Transition row of the locally largest cycle chain from perimeter p.
// As printed, the odd equal-split row sends 2m+1 to m; the alternative
// follows the larger child (m+1). The two differ by O(1/p).
enum class OddSplitRule { AsPrinted, LargerChild };

class LlcKernel {
 public:
  LlcKernel(int p, const WeightTable& w,
            OddSplitRule rule = OddSplitRule::AsPrinted);

  int perimeter() const { return p_; }
  const std::vector<std::pair<int, double>>& row() const { return row_; }
  double row_sum() const;
  int sample(RandomStream& rs) const;
  // sum_q b(p,q) f(q) - f(p); <= 0 (f is a supermartingale for the chain).
  double f_drift(const WeightTable& w) const;
  // p^{3/2} sum_q ln(q/p)^2 b(p,q); converges to 2 t ∫ ln(x)^2 nu(dx).
  double log_second_moment() const;

 private:
  int p_;
  std::vector<std::pair<int, double>> row_;  // fixed order: q=p+1, pairs desc, middle, 0
  std::vector<double> cum_;
};

// f-reweighted one-step law of the distinguished cycle (the law of the
// peeling step in the UIPT of the p-gon): every Boltzmann mass is multiplied
// by f(sum over new distinguished candidates)/f(p), and on a split the
// distinguished child is chosen proportionally to f. The masses summing to
// one is the martingale property of M; deviation beyond 1e-8 throws.
class UiptStepLaw {
 public:
  UiptStepLaw(int p, const WeightTable& w);

  int perimeter() const { return p_; }
  double prob_c() const { return prob_c_; }
  double prob_g(int k) const { return prob_g_[static_cast<size_t>(k)]; }
  double prob_v() const { return 0.0; }  // f(0) = 0: the spine never closes
  double total() const;
  // P(distinguished child is the (k+1)-cycle | event G_k).
  double child_one_prob(int k) const;

  // Samples the event and, for a split, the new distinguished perimeter.
  struct Step {
    PeelEvent event;
    int distinguished;  // perimeter of the distinguished cycle afterwards
  };
  Step sample(RandomStream& rs) const;

 private:
  int p_;
  double prob_c_;
  std::vector<double> prob_g_;
  std::vector<double> cum_;
  const WeightTable* w_;
};

}  // namespace trigf
