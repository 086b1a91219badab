#pragma once

// Experiment orchestration: the exact-identity suite, the statistical
// comparisons against the continuum, CSV/JSON export, and deterministic
// parallelism. Work fans out over sample indices; every sample derives its
// random streams from (seed, experiment tag, sample index), so results are
// byte-identical for any thread count.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "trigf/gf.hpp"
#include "trigf/kernel.hpp"
#include "trigf/layers.hpp"
#include "trigf/llc.hpp"
#include "trigf/stats.hpp"
#include "trigf/weights.hpp"

namespace trigf {

struct RunContext {
  uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path out_dir;  // empty: no file output
};

// Deterministic parallel map: results land in sample order no matter which
// worker produced them. `make_state` builds one worker-local state (e.g. a
// StepLawCache); `fn(state, i)` must only touch shared data read-only.
template <typename Result, typename MakeState, typename Fn>
std::vector<Result> parallel_map(size_t n, int threads, MakeState&& make_state,
                                 Fn&& fn) {
  std::vector<Result> out(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    auto state = make_state();
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) break;
      out[i] = fn(state, i);
    }
  };
  int t = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

// One line of a report: a named check with its verdict.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::vector<CheckResult> checks;
  double runtime_seconds = 0.0;
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
  std::string to_json(uint64_t seed) const;
};

// ---------------------------------------------------------------------------
// Exact-identity suite (criterion 1; the `validate` subcommand)
// ---------------------------------------------------------------------------

Report validate_exact_suite(int p_sweep_max = 10000);

// ---------------------------------------------------------------------------
// Statistical experiments
// ---------------------------------------------------------------------------

// Martingale Monte Carlo (criterion 2).
Report martingale_experiment(const RunContext& ctx, size_t n_mart = 100000,
                             size_t n_vol = 100000);

// UIPT h-transform checks (criterion 3).
Report uipt_experiment(const RunContext& ctx, size_t n_samples = 1000000);

// Locally-largest scaling (criterion 4).
Report llc_scaling_experiment(const RunContext& ctx, size_t n_samples = 10000);

// Theorem-1 finite-dimensional marginals (criterion 5). Functional
// convergence is not tested; ranked marginals at a height grid stand in.
Report theorem1_experiment(const RunContext& ctx, int p = 1000,
                           std::vector<double> r_grid = {0.2, 0.5, 1.0},
                           size_t n_samples = 10000);

// Cutoff experiments (criteria 6 and 7 share the frozen explorations).
Report cutoff_experiment(const RunContext& ctx, int p = 2000,
                         std::vector<double> eps_ladder = {0.1, 0.05, 0.02, 0.01},
                         size_t n_runs = 200, double delta_height = 0.5);

// Height vs extinction time (criterion 8).
Report height_experiment(const RunContext& ctx, int p = 400, size_t n_samples = 5000);

// Continuum internal checks (criterion 9).
Report continuum_experiment(const RunContext& ctx, size_t n_paths = 1000000);

// Byte-identical reproducibility across thread counts (criterion 10).
Report reproducibility_experiment(const RunContext& ctx);

// ---------------------------------------------------------------------------
// CLI data exports
// ---------------------------------------------------------------------------

void export_weights_json(const std::filesystem::path& file, int p_max,
                         int counts_n_max, int counts_p_max, uint64_t seed);
void export_step_law(const std::filesystem::path& file, int p, bool llc_row,
                     const std::string& format, uint64_t seed);
void export_explorations(const RunContext& ctx, int p0, size_t n_samples,
                         double cutoff, int max_height, bool synchronized);
void export_llc(const RunContext& ctx, const std::filesystem::path& file, int p0,
                size_t n_samples, bool heights);
void export_cell_systems(const RunContext& ctx, double x0, double mass_floor,
                         double delta, double horizon, size_t n_samples);
void export_cumulants(const std::filesystem::path& file, double q_lo, double q_hi,
                      double q_step, uint64_t seed);

}  // namespace trigf
