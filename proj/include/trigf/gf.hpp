#pragma once

// Continuum limit machinery.
//
// The spectrally negative Levy process xi has Laplace exponent
//   Psi(q) = -(8/3) q + int_{1/2}^1 (x^q - 1 + q(1-x)) (x(1-x))^{-5/2} dx,
// its jumps are ln(x) with x distributed by nu(dx) = (x(1-x))^{-5/2} dx on
// [1/2, 1). Simulation truncates the infinite activity at 1-x < delta; the
// kept jumps are Poisson with the exact restricted law, the truncated band
// is replaced by its compensated mean (always) plus an optional centered
// Gaussian matching its variance. The Lamperti transform at index -1/2
// (resp. -3/2) turns exp(xi) into the self-similar Markov process X (resp.
// X~), and the cell system spawns a daughter at every negative jump of a
// cell's mass, realizing the growth-fragmentation process.

#include <bit>
#include <cstdint>
#include <limits>
#include <vector>

#include "trigf/rng.hpp"

namespace trigf {

// ---------------------------------------------------------------------------
// Cumulants
// ---------------------------------------------------------------------------

double psi(double q);                  // adaptive quadrature, abs tol 1e-10
double psi_prime0_quadrature();        // -8/3 + int (ln x + 1-x) nu(dx)
double psi_prime0_closed();            // -8/3 + (8/9)(6 pi - 18)
double kappa(double q);                // (4 sqrt pi / 3) Gamma(q-3/2) / Gamma(q-3)
double kappa_integral(double q);       // Psi(q) + int (1-x)^q nu(dx), q > 3/2

// Moments of nu over the band 1-x in [wa, wb] (0 <= wa < wb <= 1/2).
double nu_band_mass(double wa, double wb);
double nu_band_compensator(double wa, double wb);    // int (1-x) nu
double nu_band_log_mean(double wa, double wb);       // int ln(x) nu
double nu_band_log_variance(double wa, double wb);   // int ln(x)^2 nu
double nu_band_residual_mean(double wa, double wb);  // int (ln x + 1-x) nu
double nu_log_second_moment();                       // int ln(x)^2 nu, full band

// ---------------------------------------------------------------------------
// Truncated jump sampler
// ---------------------------------------------------------------------------

// Inverse-CDF sampler for nu restricted to 1-x in [delta, 1/2], tabulated as
// cubic Hermite slots on a dyadically refined grid of the uniform variable
// (finer towards the rare large jumps). One 32-bit draw per jump.
class JumpTable {
 public:
  explicit JumpTable(double delta);

  double delta() const { return delta_; }
  double lambda() const { return lambda_; }

  // y = ln x of the jump; w = 1 - x alongside when needed. One 32-bit draw
  // per jump; hot path, kept inline.
  double sample_y(uint32_t r) const {
    const Slot* s;
    double t;
    locate(r, s, t);
    return ((s->y[3] * t + s->y[2]) * t + s->y[1]) * t + s->y[0];
  }
  struct YW {
    double y, w;
  };
  YW sample_yw(uint32_t r) const {
    const Slot* s;
    double t;
    locate(r, s, t);
    return {((s->y[3] * t + s->y[2]) * t + s->y[1]) * t + s->y[0],
            ((s->w[3] * t + s->w[2]) * t + s->w[1]) * t + s->w[0]};
  }

  // u-coordinate of a w-threshold: jumps with 1-x < w_cut have r/2^32 below
  // this (the table is ascending in 1-x).
  double cdf_fraction(double w_cut) const;

  // Largest relative error of the tabulated inverse against direct numeric
  // inversion, measured on a validation grid at build time.
  double max_rel_error() const { return max_rel_error_; }

 private:
  struct Slot {
    double y[4];
    double w[4];
  };
  static constexpr int kSlabs = 24;
  static constexpr int kSlotsPerSlab = 256;

  void locate(uint32_t r, const Slot*& slot, double& t) const {
    uint32_t tau = ~r;
    int lz = tau == 0 ? 32 : std::countl_zero(tau);
    int s = lz >= kSlabs - 1 ? kSlabs - 1 : lz;
    double u01 = (static_cast<double>(r) + 0.5) * 0x1.0p-32;
    double x = (u01 - slab_lo_[static_cast<size_t>(s)]) * slab_scale_[static_cast<size_t>(s)];
    int j = static_cast<int>(x);
    if (j < 0) j = 0;
    if (j >= kSlotsPerSlab) j = kSlotsPerSlab - 1;
    t = x - j;
    slot = &slots_[static_cast<size_t>(s) * kSlotsPerSlab + j];
  }

  double delta_ = 0.0;
  double lambda_ = 0.0;
  double max_rel_error_ = 0.0;
  std::vector<Slot> slots_;  // kSlabs * kSlotsPerSlab
  double slab_lo_[kSlabs] = {};
  double slab_scale_[kSlabs] = {};
};

// ---------------------------------------------------------------------------
// Truncated process
// ---------------------------------------------------------------------------

struct XiConfig {
  double delta = 1e-3;
  bool gaussian_proxy = true;  // centered Gaussian for the truncated band
};

class XiModel {
 public:
  explicit XiModel(const XiConfig& cfg);

  const XiConfig& config() const { return cfg_; }
  const JumpTable& jumps() const { return table_; }
  double lambda() const { return table_.lambda(); }
  // -8/3 + int_keep (1-x) nu + int_cut (ln x + 1-x) nu: between jumps the
  // compensated truncated process drifts at this rate.
  double drift() const { return drift_; }
  double proxy_sigma2() const { return proxy_sigma2_; }
  bool proxy_on() const { return cfg_.gaussian_proxy; }

  // Laplace exponent of the simulated (truncated, compensated, optionally
  // proxied) process; E exp(q xi_delta(t)) = exp(t * this).
  double truncated_psi(double q) const;

  // xi_delta(t) in one shot (no path). Used by the Laplace-transform checks.
  double terminal_value(double t, RandomStream& rs) const;

 private:
  XiConfig cfg_;
  JumpTable table_;
  double drift_ = 0.0;
  double proxy_sigma2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Lamperti walks, cells, cell systems
// ---------------------------------------------------------------------------

// Positive self-similar Markov process of index alpha in {-1/2, -3/2}
// driven by xi, started from x0: X(t) = x0 exp(xi(tau(x0^alpha t))).
// Evaluates at the (sorted ascending) query times; a path absorbed before a
// query time contributes 0. Jumps and queries are resolved exactly within
// the piecewise-linear segments.
std::vector<double> pssmp_values(const XiModel& m, double alpha, double x0,
                                 const std::vector<double>& times, uint64_t key,
                                 double absorb_mass);

// Empirical quantile table for resampling (used for sub-floor subtree
// lifetime stubs in extinction runs).
class QuantileTable {
 public:
  QuantileTable() = default;
  explicit QuantileTable(std::vector<double> samples);
  bool empty() const { return q_.empty(); }
  double sample(double u01) const;  // inverse empirical CDF
  double quantile(double q) const;

 private:
  std::vector<double> q_;
};

struct CellSystemConfig {
  double x0 = 1.0;
  double mass_floor = 2e-3;  // absolute: daughters below are not spawned
  double horizon = std::numeric_limits<double>::infinity();
  std::vector<double> query_times;  // ascending
  bool need_extinction = false;
  double absorb_mass = 0.0;  // 0: mass_floor / 10
  const QuantileTable* lifetime_stubs = nullptr;  // unit-mass subtree lifetime
  size_t cell_cap = 1'000'000;
};

struct CellRecord {
  uint64_t key;
  double birth_time;
  double mass;
};

struct CellSystemResult {
  std::vector<std::vector<double>> ranked;  // per query time, descending
  double extinction = 0.0;  // last cell death (plus stub estimates)
  size_t cell_count = 0;
  bool capped = false;
};

CellSystemResult simulate_cell_system(const XiModel& m,
                                      const CellSystemConfig& cfg, uint64_t key);

// Two-stage bootstrap of the unit-mass subtree extinction law used for the
// stubs: stage one runs without stubs (deep absorption), stage two reruns
// with stage-one stubs and the production absorption threshold.
QuantileTable build_lifetime_stub_table(const XiModel& m, double mass_floor,
                                        size_t n_samples, uint64_t seed,
                                        double absorb_mass = 0.0);

}  // namespace trigf
