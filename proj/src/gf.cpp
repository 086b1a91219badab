#include "trigf/gf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "trigf/quadrature.hpp"
#include "trigf/stats.hpp"

namespace trigf {

// ---------------------------------------------------------------------------
// nu integrals (w = 1 - x coordinates, density (w(1-w))^{-5/2} on (0, 1/2])
// ---------------------------------------------------------------------------

namespace {

double nu_w(double w) { return std::pow(w * (1.0 - w), -2.5); }

// ((1-w)^q - 1 + q w) / w^2, stable down to w = 0.
double compensated_power_over_w2(double q, double w) {
  if (w > 1e-3) {
    return (std::expm1(q * std::log1p(-w)) + q * w) / (w * w);
  }
  double term = q * (q - 1.0) / 2.0;  // j = 2 coefficient of the series / w^2
  double sum = term;
  double wpow = 1.0;
  for (int j = 2; j < 40; ++j) {
    term *= -(q - j) / (j + 1.0);
    wpow *= w;
    double add = term * wpow;
    sum += add;
    if (std::fabs(add) < 1e-20 * std::fabs(sum) + 1e-300) break;
  }
  return sum;
}

// (ln(1-w) + w) / w^2, stable down to w = 0.
double log_compensated_over_w2(double w) {
  if (w > 1e-3) return (std::log1p(-w) + w) / (w * w);
  double sum = -0.5;
  double wpow = 1.0;
  for (int j = 3; j < 40; ++j) {
    wpow *= w;
    sum -= wpow / j;
  }
  return sum;
}

// Integral over w in [wa, wb] of fw2(w) * w^2 * nu(w), computed in u = sqrt w
// so the w -> 0 endpoint is regular whenever fw2 is bounded there:
//   integrand(u) = 2 * fw2(u^2) * (1 - u^2)^{-5/2}.
double band_integral_over_w2(const std::function<double(double)>& fw2, double wa,
                             double wb, double tol = 1e-12) {
  double ua = std::sqrt(wa), ub = std::sqrt(wb);
  auto f = [&](double u) {
    double w = u * u;
    return 2.0 * fw2(w) * std::pow(1.0 - w, -2.5);
  };
  return integrate(f, ua, ub, tol, tol).value;
}

// Integral of h(w) nu(w) dw over [wa, wb] with wa > 0 (no singular endpoint
// handling needed beyond the u substitution).
double band_integral(const std::function<double(double)>& h, double wa, double wb,
                     double tol = 1e-12) {
  if (!(wa > 0.0)) throw std::invalid_argument("band_integral: wa must be > 0");
  double ua = std::sqrt(wa), ub = std::sqrt(wb);
  auto f = [&](double u) {
    double w = u * u;
    return 2.0 * h(w) * u * nu_w(w);
  };
  return integrate(f, ua, ub, tol, tol).value;
}

}  // namespace

double psi(double q) {
  // Also defined for slightly negative q (the compensated integrand stays
  // integrable), which finite-difference derivative checks rely on.
  if (q < -0.25) throw std::invalid_argument("psi: q < -1/4");
  if (q == 0.0) return 0.0;
  double integral = band_integral_over_w2(
      [q](double w) { return compensated_power_over_w2(q, w); }, 0.0, 0.5, 1e-12);
  return -(8.0 / 3.0) * q + integral;
}

double psi_prime0_quadrature() {
  double integral =
      band_integral_over_w2([](double w) { return log_compensated_over_w2(w); },
                            0.0, 0.5, 1e-12);
  return -(8.0 / 3.0) + integral;
}

// -8/3 + int (ln x + 1-x) nu(dx) with the integral in closed form,
// 8(17-6pi)/9, giving (112 - 48 pi)/9. (A frequently quoted variant of this
// constant, -8/3 + 8(6pi-18)/9 = -1.9115, cannot be the derivative: convexity
// of Psi with Psi(0) = 0 and Psi(1) = -8/3 forces Psi'(0) <= -8/3.)
double psi_prime0_closed() { return (112.0 - 48.0 * M_PI) / 9.0; }

namespace {

double rgamma(double x) {
  if (x > 0.0) return 1.0 / std::tgamma(x);
  if (x == std::floor(x)) return 0.0;  // pole of Gamma: reciprocal vanishes
  return std::tgamma(1.0 - x) * std::sin(M_PI * x) / M_PI;
}

}  // namespace

double kappa(double q) {
  if (!(q > 1.5)) throw std::invalid_argument("kappa closed form needs q > 3/2");
  return (4.0 * std::sqrt(M_PI) / 3.0) * std::tgamma(q - 1.5) * rgamma(q - 3.0);
}

double kappa_integral(double q) {
  if (!(q > 1.5)) throw std::invalid_argument("kappa_integral needs q > 3/2");
  // int w^q nu dw = int 2 u^{2q-4} (1-u^2)^{-5/2} du
  auto f = [q](double u) {
    return 2.0 * std::pow(u, 2.0 * q - 4.0) * std::pow(1.0 - u * u, -2.5);
  };
  double tail = integrate(f, 0.0, std::sqrt(0.5), 1e-12, 1e-12).value;
  return psi(q) + tail;
}

double nu_band_mass(double wa, double wb) {
  return band_integral([](double) { return 1.0; }, wa, wb);
}

double nu_band_compensator(double wa, double wb) {
  return band_integral([](double w) { return w; }, wa, wb);
}

double nu_band_log_mean(double wa, double wb) {
  return band_integral([](double w) { return std::log1p(-w); }, wa, wb);
}

double nu_band_log_variance(double wa, double wb) {
  if (wa == 0.0) {
    return band_integral_over_w2(
        [](double w) {
          double l = std::log1p(-w);
          return (l / w) * (l / w);
        },
        0.0, wb);
  }
  return band_integral(
      [](double w) {
        double l = std::log1p(-w);
        return l * l;
      },
      wa, wb);
}

double nu_band_residual_mean(double wa, double wb) {
  if (wa == 0.0) {
    return band_integral_over_w2(
        [](double w) { return log_compensated_over_w2(w); }, 0.0, wb);
  }
  return band_integral([](double w) { return std::log1p(-w) + w; }, wa, wb);
}

double nu_log_second_moment() { return nu_band_log_variance(0.0, 0.5); }

// ---------------------------------------------------------------------------
// JumpTable
// ---------------------------------------------------------------------------

namespace {

// 15-point Gauss-Kronrod on one interval (build-time panel integration).
double gk15(const std::function<double(double)>& f, double a, double b) {
  static const double nodes[8] = {0.0,
                                  0.207784955007898468,
                                  0.405845151377397167,
                                  0.586087235467691130,
                                  0.741531185599394440,
                                  0.864864423359769073,
                                  0.949107912342758525,
                                  0.991455371120812639};
  static const double wk[8] = {0.209482141084727828, 0.204432940075298892,
                               0.190350578064785410, 0.169004726639267903,
                               0.140653259715525919, 0.104790010322250184,
                               0.063092092629978553, 0.022935322010529225};
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = wk[0] * f(c);
  for (int i = 1; i < 8; ++i) {
    double x = h * nodes[i];
    s += wk[i] * (f(c + x) + f(c - x));
  }
  return s * h;
}

}  // namespace

JumpTable::JumpTable(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw std::invalid_argument("JumpTable: delta must be in (0, 1/2]");
  }
  if (delta == 0.5) return;  // degenerate: every jump truncated, lambda = 0
  auto dens_u = [](double u) {  // nu in u = sqrt(w) coordinates
    double w = u * u;
    return 2.0 * u * nu_w(w);
  };

  const int n_panels = 8192;
  double u_lo = std::sqrt(delta), u_hi = std::sqrt(0.5);
  double log_ratio = std::log(u_hi / u_lo);
  std::vector<double> edge(n_panels + 1), cum(n_panels + 1, 0.0);
  for (int i = 0; i <= n_panels; ++i) {
    edge[static_cast<size_t>(i)] = u_lo * std::exp(log_ratio * i / n_panels);
  }
  edge[0] = u_lo;
  edge[n_panels] = u_hi;
  KahanSum total;
  for (int i = 0; i < n_panels; ++i) {
    total.add(gk15(dens_u, edge[static_cast<size_t>(i)], edge[static_cast<size_t>(i) + 1]));
    cum[static_cast<size_t>(i) + 1] = total.value();
  }
  lambda_ = cum[n_panels];

  // Invert the cumulative at c in [0, lambda]: binary search the panel, then
  // bisect inside it. Build-time only.
  auto invert_u = [&](double c) -> double {
    c = std::clamp(c, 0.0, lambda_);
    size_t i = static_cast<size_t>(
        std::upper_bound(cum.begin(), cum.end(), c) - cum.begin());
    if (i > 0) --i;
    if (i >= static_cast<size_t>(n_panels)) i = n_panels - 1;
    double lo = edge[i], hi = edge[i + 1];
    double base = cum[i];
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      double v = base + gk15(dens_u, edge[i], mid);
      if (v < c) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  auto slab_lo_width = [](int s, double& lo, double& width) {
    lo = 1.0 - std::ldexp(1.0, -s);
    width = s < kSlabs - 1 ? std::ldexp(1.0, -s - 1) : std::ldexp(1.0, -(kSlabs - 1));
  };

  slots_.resize(static_cast<size_t>(kSlabs) * kSlotsPerSlab);
  for (int s = 0; s < kSlabs; ++s) {
    double lo, width;
    slab_lo_width(s, lo, width);
    double du = width / kSlotsPerSlab;
    double u_prev = invert_u(lo * lambda_);
    for (int j = 0; j < kSlotsPerSlab; ++j) {
      double a01 = lo + du * j;
      double b01 = std::min(lo + du * (j + 1), 1.0);
      double ua = u_prev;
      double ub = invert_u(b01 * lambda_);
      u_prev = ub;
      double wa = ua * ua, wb = ub * ub;
      double ya = std::log1p(-wa), yb = std::log1p(-wb);
      // slopes with respect to the slot-local coordinate t in [0,1]
      double dya = -lambda_ / (nu_w(wa) * (1.0 - wa)) * du;
      double dyb = -lambda_ / (nu_w(wb) * (1.0 - wb)) * du;
      double dwa = lambda_ / nu_w(wa) * du;
      double dwb = lambda_ / nu_w(wb) * du;
      Slot& slot = slots_[static_cast<size_t>(s) * kSlotsPerSlab + j];
      auto hermite = [](double fa, double fb, double ma, double mb, double* c) {
        c[0] = fa;
        c[1] = ma;
        c[2] = 3.0 * (fb - fa) - 2.0 * ma - mb;
        c[3] = 2.0 * (fa - fb) + ma + mb;
      };
      hermite(ya, yb, dya, dyb, slot.y);
      hermite(wa, wb, dwa, dwb, slot.w);
    }
  }

  for (int s = 0; s < kSlabs; ++s) {
    double lo, width;
    slab_lo_width(s, lo, width);
    slab_lo_[static_cast<size_t>(s)] = lo;
    slab_scale_[static_cast<size_t>(s)] = kSlotsPerSlab / width;
  }

  // Validation against direct inversion on a deterministic grid.
  RandomStream probe(0x414C56u);
  double worst = 0.0;
  for (int k = 0; k < 4000; ++k) {
    uint32_t r = probe.next_u32();
    double u01 = (static_cast<double>(r) + 0.5) * 0x1.0p-32;
    double u = invert_u(u01 * lambda_);
    double y_ref = std::log1p(-u * u);
    double y_tab = sample_y(r);
    worst = std::max(worst, std::fabs(y_tab - y_ref) / std::fabs(y_ref));
  }
  max_rel_error_ = worst;
}

double JumpTable::cdf_fraction(double w_cut) const {
  if (w_cut <= delta_) return 0.0;
  if (w_cut >= 0.5) return 1.0;
  return nu_band_mass(delta_, w_cut) / lambda_;
}

// ---------------------------------------------------------------------------
// XiModel
// ---------------------------------------------------------------------------

XiModel::XiModel(const XiConfig& cfg) : cfg_(cfg), table_(cfg.delta) {
  double keep_comp = nu_band_compensator(cfg.delta, 0.5);
  double cut_residual = nu_band_residual_mean(0.0, cfg.delta);
  drift_ = -8.0 / 3.0 + keep_comp + cut_residual;
  proxy_sigma2_ = cfg.gaussian_proxy ? nu_band_log_variance(0.0, cfg.delta) : 0.0;
}

double XiModel::truncated_psi(double q) const {
  double kept = band_integral(
      [q](double w) { return std::expm1(q * std::log1p(-w)); }, cfg_.delta, 0.5);
  return q * drift_ + kept + 0.5 * q * q * proxy_sigma2_;
}

double XiModel::terminal_value(double t, RandomStream& rs) const {
  uint64_t n = rs.next_poisson(table_.lambda() * t);
  double sum = 0.0;
  for (uint64_t i = 0; i < n; ++i) sum += table_.sample_y(rs.next_u32());
  double v = drift_ * t + sum;
  if (proxy_sigma2_ > 0.0) v += std::sqrt(proxy_sigma2_ * t) * rs.next_normal();
  return v;
}

// ---------------------------------------------------------------------------
// Lamperti walk
// ---------------------------------------------------------------------------

namespace {

// Clock increment int_0^g exp(-alpha (xi0 + d s)) ds for the linear segment.
double clock_increment(double alpha, double xi0, double d, double g) {
  double adg = -alpha * d * g;
  double head = std::exp(-alpha * xi0);
  if (std::fabs(adg) < 1e-9) {
    return head * g * (1.0 + 0.5 * adg);
  }
  return head * std::expm1(adg) / (-alpha * d);
}

// First s in [0, g] with int_0^s exp(-alpha(xi0 + d u)) du = a (a below the
// full increment).
double clock_invert(double alpha, double xi0, double d, double g, double a) {
  double head = std::exp(-alpha * xi0);
  double ad = -alpha * d;
  if (std::fabs(ad * g) < 1e-9) {
    return std::clamp(a / head, 0.0, g);
  }
  double s = std::log1p(a * ad / head) / ad;
  return std::clamp(s, 0.0, g);
}

}  // namespace

std::vector<double> pssmp_values(const XiModel& m, double alpha, double x0,
                                 const std::vector<double>& times, uint64_t key,
                                 double absorb_mass) {
  if (x0 <= 0.0) throw std::invalid_argument("pssmp_values: x0 <= 0");
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;
  RandomStream rs(key);
  const double lam = m.lambda();
  const double drift = m.drift();
  const double s2 = m.proxy_sigma2();
  const double scale = std::pow(x0, alpha);  // clock target = scale * t
  const double xi_dead = std::log(std::max(absorb_mass, 1e-300) / x0);
  double xi = 0.0, clock = 0.0;
  size_t qi = 0;
  const uint64_t max_segments = 1ull << 33;
  for (uint64_t seg = 0; seg < max_segments; ++seg) {
    double g = rs.next_exponential(lam);
    double xi_end = xi + drift * g;
    if (s2 > 0.0) xi_end += std::sqrt(s2 * g) * rs.next_normal();
    double y = m.jumps().sample_y(rs.next_u32());
    double d = (xi_end - xi) / g;
    double inc = clock_increment(alpha, xi, d, g);
    while (qi < times.size() && scale * times[qi] <= clock + inc) {
      double s = clock_invert(alpha, xi, d, g, scale * times[qi] - clock);
      out[qi] = x0 * std::exp(xi + d * s);
      ++qi;
    }
    if (qi >= times.size()) return out;
    clock += inc;
    xi = xi_end + y;
    if (xi < xi_dead) return out;  // absorbed: remaining queries stay 0
  }
  throw std::runtime_error("pssmp_values: segment budget exhausted");
}

// ---------------------------------------------------------------------------
// QuantileTable
// ---------------------------------------------------------------------------

QuantileTable::QuantileTable(std::vector<double> samples) : q_(std::move(samples)) {
  if (q_.empty()) throw std::invalid_argument("QuantileTable: empty");
  std::sort(q_.begin(), q_.end());
}

double QuantileTable::sample(double u01) const {
  double pos = u01 * static_cast<double>(q_.size() - 1);
  size_t i = static_cast<size_t>(pos);
  if (i >= q_.size() - 1) return q_.back();
  double t = pos - static_cast<double>(i);
  return q_[i] * (1.0 - t) + q_[i + 1] * t;
}

double QuantileTable::quantile(double q) const { return sample(std::clamp(q, 0.0, 1.0)); }

// ---------------------------------------------------------------------------
// Cell system
// ---------------------------------------------------------------------------

CellSystemResult simulate_cell_system(const XiModel& m, const CellSystemConfig& cfg,
                                      uint64_t key) {
  if (cfg.x0 <= 0.0 || cfg.mass_floor <= 0.0) {
    throw std::invalid_argument("simulate_cell_system: bad config");
  }
  const double absorb = cfg.absorb_mass > 0.0 ? cfg.absorb_mass : cfg.mass_floor / 10.0;
  const double lam = m.lambda();
  const double drift = m.drift();
  const double s2 = m.proxy_sigma2();
  const double t_stop = cfg.need_extinction
                            ? std::numeric_limits<double>::infinity()
                            : (cfg.query_times.empty()
                                   ? cfg.horizon
                                   : std::min(cfg.horizon, cfg.query_times.back()));
  const double stub_q999 =
      cfg.lifetime_stubs ? cfg.lifetime_stubs->quantile(0.999) : 0.0;

  CellSystemResult res;
  res.ranked.resize(cfg.query_times.size());
  std::vector<CellRecord> todo;
  todo.push_back({key, 0.0, cfg.x0});

  while (!todo.empty()) {
    CellRecord cell = todo.back();
    todo.pop_back();
    if (++res.cell_count > cfg.cell_cap) {
      res.capped = true;
      break;
    }
    RandomStream rs(cell.key);
    const double sqm = std::sqrt(cell.mass);
    const double xi_dead = std::log(absorb / cell.mass);
    // No jump can spawn while mass < 2*floor (a jump removes at most half).
    const double xi_spawnable = std::log(cfg.mass_floor / cell.mass) + std::log(2.0);
    double xi = 0.0, clock = 0.0;
    size_t qi = 0;
    while (qi < cfg.query_times.size() && cfg.query_times[qi] < cell.birth_time) ++qi;
    uint32_t spawn_rank = 0;
    uint64_t jump_index = 0;
    bool dead = false;
    while (!dead) {
      double g = rs.next_exponential(lam);
      double xi_end = xi + drift * g;
      if (s2 > 0.0) xi_end += std::sqrt(s2 * g) * rs.next_normal();
      auto [y, w] = m.jumps().sample_yw(rs.next_u32());
      double d = (xi_end - xi) / g;
      double inc = clock_increment(-0.5, xi, d, g);
      while (qi < cfg.query_times.size() &&
             (cfg.query_times[qi] - cell.birth_time) / sqm <= clock + inc) {
        double s = clock_invert(-0.5, xi, d, g,
                                (cfg.query_times[qi] - cell.birth_time) / sqm - clock);
        res.ranked[qi].push_back(cell.mass * std::exp(xi + d * s));
        ++qi;
      }
      clock += inc;
      double t_now = cell.birth_time + sqm * clock;
      ++jump_index;
      double xi_before = xi_end;
      xi = xi_end + y;
      if (xi_before >= xi_spawnable) {
        double mass_before = cell.mass * std::exp(xi_before);
        double mass_after = cell.mass * std::exp(xi);
        double daughter = mass_before - mass_after;
        if (daughter >= cfg.mass_floor && t_now <= t_stop) {
          ++spawn_rank;
          todo.push_back(
              {derive_key(cell.key, salt::kChildBase + spawn_rank), t_now, daughter});
        } else if (cfg.lifetime_stubs && cfg.need_extinction && daughter > 0.0 &&
                   t_now + std::sqrt(daughter) * stub_q999 > res.extinction) {
          RandomStream stub(derive_key(derive_key(cell.key, salt::kStub), jump_index));
          double e = cfg.lifetime_stubs->sample(stub.next_double());
          res.extinction =
              std::max(res.extinction, t_now + std::sqrt(daughter) * e);
        }
      } else if (cfg.lifetime_stubs && cfg.need_extinction &&
                 t_now + std::sqrt(cfg.mass_floor) * stub_q999 > res.extinction) {
        // Sub-spawnable regime: every dropped daughter is below the floor, so
        // sqrt(floor) * q999 bounds its stub reach; only then evaluate it.
        double mass_before = cell.mass * std::exp(xi_before);
        double daughter = -mass_before * std::expm1(y);
        if (daughter > 0.0 &&
            t_now + std::sqrt(daughter) * stub_q999 > res.extinction) {
          RandomStream stub(derive_key(derive_key(cell.key, salt::kStub), jump_index));
          double e = cfg.lifetime_stubs->sample(stub.next_double());
          res.extinction =
              std::max(res.extinction, t_now + std::sqrt(daughter) * e);
        }
      }
      if (xi < xi_dead) {
        dead = true;
        double death_time = cell.birth_time + sqm * clock;
        double mass_now = cell.mass * std::exp(xi);
        if (cfg.lifetime_stubs && cfg.need_extinction && mass_now > 0.0) {
          RandomStream stub(derive_key(derive_key(cell.key, salt::kStub), 0));
          death_time += std::sqrt(mass_now) * cfg.lifetime_stubs->sample(stub.next_double());
        }
        res.extinction = std::max(res.extinction, death_time);
      } else if (cell.birth_time + sqm * clock > t_stop && qi >= cfg.query_times.size() &&
                 !cfg.need_extinction) {
        dead = true;  // beyond every query; nothing left to record
      }
    }
  }
  for (auto& v : res.ranked) std::sort(v.begin(), v.end(), std::greater<>());
  return res;
}

QuantileTable build_lifetime_stub_table(const XiModel& m, double mass_floor,
                                        size_t n_samples, uint64_t seed,
                                        double absorb_mass) {
  CellSystemConfig cfg;
  cfg.x0 = 1.0;
  cfg.mass_floor = mass_floor;
  cfg.need_extinction = true;
  std::vector<double> stage0;
  stage0.reserve(n_samples);
  for (size_t i = 0; i < n_samples; ++i) {
    stage0.push_back(
        simulate_cell_system(m, cfg, derive_key(seed, 0xE0 + i * 2)).extinction);
  }
  QuantileTable t0(stage0);
  cfg.lifetime_stubs = &t0;
  cfg.absorb_mass = absorb_mass;
  std::vector<double> stage1;
  stage1.reserve(n_samples);
  for (size_t i = 0; i < n_samples; ++i) {
    stage1.push_back(
        simulate_cell_system(m, cfg, derive_key(seed, 0xE1000000 + i * 2)).extinction);
  }
  return QuantileTable(stage1);
}

}  // namespace trigf
