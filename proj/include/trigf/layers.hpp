#pragma once

// Branching peeling by layers.
//
// Every hole carries the heights of its boundary vertices: each vertex sits
// at the hole's base height r or at r+1, and the height-r vertices form one
// contiguous cyclic arc (property (P)). The algorithm always peels the
// unique (r+1, r) boundary edge, or any (r, r) edge on a fresh layer; when
// no height-r vertex remains the layer is complete and the base advances.
//
// Two state representations are provided.
//
// MarkedCycle keeps the explicit cyclic mark sequence (one flag per
// boundary vertex) and asserts property (P) after every mutation. It is the
// auditable reference.
//
// CycleState exploits property (P): up to the rotation (which only matters
// on a fresh layer, where every choice of edge gives the same law and the
// same mark counts), the mark sequence is exactly a block of t raised
// vertices followed by p-t base ones, with the peeled edge at the block
// boundary. Events become O(1) on the pair (p, t):
//
//   C:    (p, t) -> (p+1, t+1)
//   G_k:  t+k <  p: children (k+1, 0)        and (p-k, t)
//         t+k >= p: children (k+1, t+k-p+1)  and (p-k, p-k)
//   V:    (2, t) -> dead
//
// where the first child is the one containing the vertex clockwise after
// the peeled edge. The engine runs on CycleState; the test suite drives both
// representations through identical event sequences and requires identical
// traces.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "trigf/kernel.hpp"
#include "trigf/rng.hpp"

namespace trigf {

// ---------------------------------------------------------------------------
// Explicit-marks reference
// ---------------------------------------------------------------------------

struct MarkedCycle {
  std::vector<uint8_t> marks;  // clockwise; 1 = height r+1, 0 = height r
  int base_height = 0;

  int perimeter() const { return static_cast<int>(marks.size()); }
  int raised_count() const;
  bool property_p_holds() const;  // height-r vertices form one cyclic arc

  struct PeelEdge {
    bool layer_complete;  // no height-r vertex left
    int index;            // edge (index, index+1 mod p) otherwise
  };
  PeelEdge select_peel_edge() const;

  // Applies the event at the selected peel edge; returns 0, 1 or 2 cycles
  // (the continuing cycle first). Throws on V with p != 2 or k out of range.
  std::vector<MarkedCycle> apply_event(const PeelEvent& e) const;

  void advance_layer();  // all marks raised -> base+1, all marks cleared
};

// ---------------------------------------------------------------------------
// Compact engine state
// ---------------------------------------------------------------------------

struct CycleState {
  int perimeter = 0;
  int raised = 0;  // number of height-(base+1) boundary vertices
  int base_height = 0;

  bool layer_complete() const { return raised == perimeter; }
  void advance_layer() {
    ++base_height;
    raised = 0;
  }

  // first: contains the vertex clockwise after the peeled edge;
  // second: contains the peeled edge's tail vertex.
  std::pair<CycleState, CycleState> split(int k) const;
  CycleState after_c() const { return {perimeter + 1, raised + 1, base_height}; }
};

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

struct ExploreConfig {
  int max_height = -1;             // < 0: ceil(32 sqrt(p0))
  double cutoff_fraction = 0.0;    // > 0: freeze split children born below eps*p0
  bool track_lost = false;         // keep exploring frozen holes, tagged lost
  bool synchronized = false;       // layer-synchronized scheduling
  bool martingale_paths = false;   // record M, V at every theta_r (implies synchronized)
  bool record_genealogy = false;
  bool record_snapshots = true;
  std::vector<int> snapshot_heights;  // empty: record all heights
  uint64_t step_budget = 1'000'000'000;
};

struct GenealogyEntry {
  uint32_t id = 0;
  uint32_t parent = 0;       // == id for the root
  uint32_t child_rank = 0;   // 1-based Ulam index under the parent
  int birth_height = 0;
  int birth_perimeter = 0;
};

struct FrozenCycle {
  uint32_t id = 0;
  int perimeter = 0;
  int freeze_height = 0;   // base height when frozen
  uint64_t stream_key = 0; // for deriving the filling's stream
};

struct ExplorationTrace {
  int p0 = 0;
  // height -> cycle perimeters of the ball at that height, descending.
  std::map<int, std::vector<int>> snapshots;
  std::map<int, std::vector<int>> lost_snapshots;
  std::vector<GenealogyEntry> genealogy;
  std::vector<FrozenCycle> frozen;
  uint64_t volume = 0;       // inner vertices discovered by the main exploration
  uint64_t lost_volume = 0;  // discovered while filling frozen holes (track_lost)
  uint64_t steps = 0;
  int max_layer = 0;          // largest base height reached
  int max_vertex_height = 0;  // largest vertex height seen (Height of the map)
  bool complete = true;       // false if the step budget was exhausted
  std::vector<double> m_path;  // cycle martingale at theta_0, theta_1, ...
  std::vector<double> v_path;  // volume martingale at the same times

  void sort_snapshots();
  // sup_r p0^-3 sum of cubed lost-cycle perimeters at height r.
  double lost_mass() const;
};

// Runs one branching peeling-by-layers exploration. `sample_key` seeds the
// per-cycle random streams; identical (p0, config, sample_key) give
// bit-identical traces in either scheduling mode and for any worker count.
ExplorationTrace explore(int p0, const ExploreConfig& config,
                         uint64_t sample_key, StepLawCache& laws);

// Ulam label string ("0", "0.2.1", ...) for genealogy output.
std::string genealogy_label(const std::vector<GenealogyEntry>& g, uint32_t id);

}  // namespace trigf
