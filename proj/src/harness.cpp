#include "trigf/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "trigf/io.hpp"
#include "trigf/quadrature.hpp"

namespace trigf {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

std::string fmt(double x) { return format_double(x); }

CheckResult check(const std::string& name, bool pass, const std::string& detail) {
  return {name, pass, detail};
}

// Experiment tags feeding the per-sample stream keys.
namespace tag {
constexpr uint64_t kMartingale = 0x4D415254;
constexpr uint64_t kVolume = 0x564F4C00;
constexpr uint64_t kUipt = 0x55495054;
constexpr uint64_t kLlcKernel = 0x4C4C434B;
constexpr uint64_t kLlcEngine = 0x4C4C4345;
constexpr uint64_t kLlcLimit = 0x4C4C434C;
constexpr uint64_t kTheorem1D = 0x54483144;
constexpr uint64_t kTheorem1C = 0x54483143;
constexpr uint64_t kCutoff = 0x43555446;
constexpr uint64_t kHeightD = 0x48544431;
constexpr uint64_t kHeightC = 0x48544332;
constexpr uint64_t kHeightStub = 0x48545342;
constexpr uint64_t kLaplace = 0x4C41504C;
constexpr uint64_t kSelfSim = 0x53534D31;
constexpr uint64_t kPathId = 0x50415448;
constexpr uint64_t kExport = 0x45585054;
}  // namespace tag

uint64_t sample_key(uint64_t seed, uint64_t experiment, uint64_t index) {
  return derive_key(derive_key(seed, experiment), salt::kSample + index);
}

}  // namespace

std::string Report::to_json(uint64_t seed) const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["version"] = version_string();
  j["seed"] = seed;
  j["runtime_seconds"] = runtime_seconds;
  j["pass"] = all_pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Exact-identity suite
// ---------------------------------------------------------------------------

Report validate_exact_suite(int p_sweep_max) {
  Timer timer;
  Report rep;
  rep.experiment = "validate";
  WeightTable w(std::max(100002, p_sweep_max + 2));

  {
    double worst = 0.0;
    int worst_p = 0;
    for (int p = 1; p <= p_sweep_max; ++p) {
      double r = w.z_recurrence_residual(p);
      if (r > worst) {
        worst = r;
        worst_p = p;
      }
    }
    rep.checks.push_back(check(
        "Z one-step recurrence, p <= " + std::to_string(p_sweep_max),
        worst <= 1e-10, "max residual " + fmt(worst) + " at p=" + std::to_string(worst_p)));
  }

  {
    double worst_norm = 0.0, worst_sym = 0.0;
    for (int p = 1; p <= p_sweep_max; ++p) {
      StepMasses m = step_law_masses(p, w);
      worst_norm = std::max(worst_norm, std::fabs(m.total() - 1.0));
      for (int k = 0; 2 * k < p; ++k) {
        worst_sym = std::max(
            worst_sym, std::fabs(m.prob_g[static_cast<size_t>(k)] -
                                 m.prob_g[static_cast<size_t>(p - 1 - k)]));
      }
    }
    rep.checks.push_back(check("step-law normalization", worst_norm <= 1e-10,
                               "max |1 - total| = " + fmt(worst_norm)));
    rep.checks.push_back(check("split symmetry b_k = b_{p-1-k}", worst_sym == 0.0,
                               "max asymmetry " + fmt(worst_sym)));
  }

  {
    double worst = 0.0;
    for (int p = 1; p <= p_sweep_max; ++p) {
      worst = std::max(worst, std::fabs(LlcKernel(p, w).row_sum() - 1.0));
    }
    rep.checks.push_back(check("locally-largest row normalization", worst <= 1e-10,
                               "max |1 - sum| = " + fmt(worst)));
  }

  {
    auto h = half_plane_identities(w, 50000, 100000);
    rep.checks.push_back(check("half-plane mass identity", std::fabs(h.residual_mass) <= 1e-6,
                               "residual " + fmt(h.residual_mass)));
    rep.checks.push_back(check("half-plane drift identity",
                               std::fabs(h.residual_drift) <= 1e-6,
                               "residual " + fmt(h.residual_drift)));
  }

  {
    double k2 = kappa(2.0), k3 = kappa(3.0), k4 = kappa(4.0);
    double k2q = kappa_integral(2.0), k3q = kappa_integral(3.0);
    rep.checks.push_back(check("kappa(2) = 0", std::fabs(k2) <= 1e-7 && std::fabs(k2q) <= 1e-7,
                               "closed " + fmt(k2) + ", quadrature " + fmt(k2q)));
    rep.checks.push_back(check("kappa(3) = 0", std::fabs(k3) <= 1e-7 && std::fabs(k3q) <= 1e-7,
                               "closed " + fmt(k3) + ", quadrature " + fmt(k3q)));
    rep.checks.push_back(
        check("kappa(4) = pi", std::fabs(k4 - M_PI) <= 1e-6, "value " + fmt(k4)));
  }

  {
    double h = 1e-5;
    double fd = (psi(h) - psi(-h)) / (2.0 * h);
    double closed = psi_prime0_closed();
    rep.checks.push_back(check(
        "psi'(0) finite difference vs closed form", std::fabs(fd - closed) <= 1e-6,
        "fd " + fmt(fd) + " closed " + fmt(closed) +
            " (= (112-48pi)/9; a convex psi with psi(1) = -8/3 cannot have "
            "derivative -1.911506 at 0)"));
  }

  {
    double worst = llc_max_relative_f_drift(1, p_sweep_max, w);
    rep.checks.push_back(check("f-supermartingale sweep", worst <= 1e-9,
                               "max drift/f = " + fmt(worst)));
  }

  {
    bool ok = true;
    CountTable t = count_oracle_dp(40, 40);
    for (int n = 0; n <= 40 && ok; ++n) {
      for (int p = 1; p <= 40 && ok; ++p) {
        if (n == 0 && p == 1) continue;
        ok = t.at(n, p) == count_triangulations(n, p);
      }
    }
    rep.checks.push_back(
        check("exact counts: formula vs peeling recurrence, n,p <= 40", ok,
              ok ? "all entries equal" : "mismatch found"));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 2: martingale Monte Carlo
// ---------------------------------------------------------------------------

Report martingale_experiment(const RunContext& ctx, size_t n_mart, size_t n_vol) {
  Timer timer;
  Report rep;
  rep.experiment = "martingale_mc";
  static WeightTable w(1 << 18);

  for (int p0 : {4, 10}) {
    struct Paths {
      double m[4];
      double v[4];
    };
    auto results = parallel_map<Paths>(
        n_mart, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          ExploreConfig cfg;
          cfg.martingale_paths = true;
          cfg.max_height = 3;
          cfg.record_snapshots = false;
          auto tr = explore(p0, cfg,
                            sample_key(ctx.seed, tag::kMartingale + p0, i), *laws);
          Paths out{};
          for (int r = 0; r <= 3; ++r) {
            bool have = r < static_cast<int>(tr.m_path.size());
            out.m[r] = have ? tr.m_path[static_cast<size_t>(r)] : 0.0;
            out.v[r] = have ? tr.v_path[static_cast<size_t>(r)]
                            : static_cast<double>(tr.volume);
          }
          return out;
        });
    for (int r = 1; r <= 3; ++r) {
      MeanAccumulator am, av;
      for (const auto& res : results) {
        am.add(res.m[r]);
        av.add(res.v[r]);
      }
      double dm = std::fabs(am.mean() - w.f(p0));
      double dv = std::fabs(av.mean() - w.g(p0));
      rep.checks.push_back(check(
          "E[M at theta_" + std::to_string(r) + "] = f(" + std::to_string(p0) + ")",
          dm <= 3.0 * am.std_error(),
          "mean " + fmt(am.mean()) + " target " + fmt(w.f(p0)) + " [" +
              fmt(dm / std::max(am.std_error(), 1e-300)) + " SE]"));
      rep.checks.push_back(check(
          "E[V at theta_" + std::to_string(r) + "] = g(" + std::to_string(p0) + ")",
          dv <= 3.0 * av.std_error(),
          "mean " + fmt(av.mean()) + " target " + fmt(w.g(p0)) + " [" +
              fmt(dv / std::max(av.std_error(), 1e-300)) + " SE]"));
    }
  }

  for (int p0 : {1, 2, 3}) {
    auto vols = parallel_map<double>(
        n_vol, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          ExploreConfig cfg;
          cfg.record_snapshots = false;
          return static_cast<double>(
              explore(p0, cfg, sample_key(ctx.seed, tag::kVolume + p0, i), *laws)
                  .volume);
        });
    MeanAccumulator acc;
    for (double v : vols) acc.add(v);
    double d = std::fabs(acc.mean() - w.g(p0));
    rep.checks.push_back(
        check("E[volume] = g(" + std::to_string(p0) + ")", d <= 3.0 * acc.std_error(),
              "mean " + fmt(acc.mean()) + " target " + fmt(w.g(p0)) + " [" +
                  fmt(d / std::max(acc.std_error(), 1e-300)) + " SE]"));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 3: UIPT h-transform
// ---------------------------------------------------------------------------

Report uipt_experiment(const RunContext& ctx, size_t n_samples) {
  Timer timer;
  Report rep;
  rep.experiment = "uipt_htransform";
  static WeightTable w(2048);

  {
    double worst = 0.0;
    for (int p = 1; p <= 1000; ++p) {
      worst = std::max(worst, std::fabs(UiptStepLaw(p, w).total() - 1.0));
    }
    rep.checks.push_back(check("reweighted row sums, p <= 1000", worst <= 1e-10,
                               "max |1 - sum| = " + fmt(worst)));
  }

  {
    // E[sum_cycles f after 5 branching steps] = f(10): the cycle martingale,
    // whose one-step version is exactly the reweighted rows summing to one.
    const int p0 = 10, steps = 5;
    auto samples = parallel_map<double>(
        n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          RandomStream rs(sample_key(ctx.seed, tag::kUipt, i));
          std::vector<int> perims = {p0};
          for (int s = 0; s < steps && !perims.empty(); ++s) {
            int p = perims.front();
            PeelEvent e = laws->sample(p, rs);
            switch (e.kind) {
              case PeelEvent::Kind::C:
                perims.front() = p + 1;
                break;
              case PeelEvent::Kind::V:
                perims.erase(perims.begin());
                break;
              case PeelEvent::Kind::Split: {
                int a = e.k + 1, b = p - e.k;
                perims.front() = std::max(a, b);
                perims.insert(perims.begin() + 1, std::min(a, b));
                break;
              }
            }
          }
          KahanSum m;
          for (int p : perims) m.add(w.f(p));
          return m.value() / w.f(p0);
        });
    MeanAccumulator acc;
    for (double x : samples) acc.add(x);
    double d = std::fabs(acc.mean() - 1.0);
    rep.checks.push_back(check(
        "E[M_5]/f(10) = 1", d <= 3.0 * acc.std_error(),
        "mean " + fmt(acc.mean()) + " [" + fmt(d / acc.std_error()) + " SE]"));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 4: locally-largest scaling limit
// ---------------------------------------------------------------------------

Report llc_scaling_experiment(const RunContext& ctx, size_t n_samples) {
  Timer timer;
  Report rep;
  rep.experiment = "llc_scaling";
  static WeightTable w(1 << 18);

  {
    const int p = 1000;
    const uint64_t n_steps =
        static_cast<uint64_t>(std::floor(std::pow(p, 1.5) * 0.05));
    auto discrete = parallel_map<double>(
        n_samples, ctx.threads, [&] { return std::make_unique<LlcKernelCache>(w); },
        [&](std::unique_ptr<LlcKernelCache>& kernels, size_t i) {
          return llc_value_after(p, n_steps, sample_key(ctx.seed, tag::kLlcKernel, i),
                                 *kernels) /
                 static_cast<double>(p);
        });
    // Height-matched continuum time: n = floor(p^{3/2} t) corresponds to
    // X~(2 t_tri * n / p^{3/2}).
    double t_cont = 2.0 * ModelConstants::get().t_triangle *
                    (static_cast<double>(n_steps) / std::pow(p, 1.5));
    XiModel model(XiConfig{1e-3, true});
    auto continuum = parallel_map<double>(
        n_samples, ctx.threads, [] { return 0; },
        [&](int&, size_t i) {
          return pssmp_values(model, -1.5, 1.0, {t_cont},
                              sample_key(ctx.seed, tag::kLlcLimit, i), 1e-8)[0];
        });
    auto ks = ks_two_sample(discrete, continuum);
    rep.checks.push_back(
        check("KS: chain at p=1000 vs continuum", ks.pass_1pct(),
              "D = " + fmt(ks.statistic) + " crit(1%) = " + fmt(ks.critical_1pct)));
  }

  {
    const int p = 200;
    const uint64_t n_steps =
        static_cast<uint64_t>(std::floor(std::pow(p, 1.5) * 0.1));
    auto a = parallel_map<double>(
        n_samples, ctx.threads, [&] { return std::make_unique<LlcKernelCache>(w); },
        [&](std::unique_ptr<LlcKernelCache>& kernels, size_t i) {
          return llc_value_after(p, n_steps, sample_key(ctx.seed, tag::kLlcKernel + 1, i),
                                 *kernels) /
                 static_cast<double>(p);
        });
    auto b = parallel_map<double>(
        n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          return llc_engine_value_after(p, n_steps,
                                        sample_key(ctx.seed, tag::kLlcEngine, i), *laws) /
                 static_cast<double>(p);
        });
    auto ks = ks_two_sample(a, b);
    rep.checks.push_back(
        check("KS: kernel-driven vs engine-driven chain at p=200", ks.pass_1pct(),
              "D = " + fmt(ks.statistic) + " crit(1%) = " + fmt(ks.critical_1pct)));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 5: theorem-1 ranked marginals
// ---------------------------------------------------------------------------

Report theorem1_experiment(const RunContext& ctx, int p, std::vector<double> r_grid,
                           size_t n_samples) {
  Timer timer;
  Report rep;
  rep.experiment = "theorem1_marginals";
  static WeightTable w(1 << 18);
  const double sqrt_p = std::sqrt(static_cast<double>(p));

  std::vector<int> heights;
  for (double r : r_grid) heights.push_back(static_cast<int>(std::floor(r * sqrt_p)));

  struct Ranked {
    double top[8][3];
  };
  auto discrete = parallel_map<Ranked>(
      n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
      [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
        ExploreConfig cfg;
        cfg.snapshot_heights = heights;
        cfg.max_height = *std::max_element(heights.begin(), heights.end()) + 1;
        auto tr = explore(p, cfg, sample_key(ctx.seed, tag::kTheorem1D, i), *laws);
        Ranked out{};
        for (size_t h = 0; h < heights.size(); ++h) {
          auto it = tr.snapshots.find(heights[h]);
          for (int rank = 0; rank < 3; ++rank) {
            out.top[h][rank] =
                it != tr.snapshots.end() && rank < static_cast<int>(it->second.size())
                    ? it->second[static_cast<size_t>(rank)] / static_cast<double>(p)
                    : 0.0;
          }
        }
        return out;
      });

  // Continuum side: the cell system queried at the height-matched times
  // t = time_factor * h / sqrt(p).
  std::vector<double> times;
  for (int h : heights) {
    times.push_back(ModelConstants::get().time_factor * h / sqrt_p);
  }
  XiModel model(XiConfig{1e-2, true});
  auto continuum = parallel_map<Ranked>(
      n_samples, ctx.threads, [] { return 0; },
      [&](int&, size_t i) {
        CellSystemConfig cfg;
        cfg.x0 = 1.0;
        cfg.mass_floor = 1.5e-3;
        cfg.absorb_mass = 5e-4;
        cfg.query_times = times;
        auto res =
            simulate_cell_system(model, cfg, sample_key(ctx.seed, tag::kTheorem1C, i));
        Ranked out{};
        for (size_t h = 0; h < times.size(); ++h) {
          for (int rank = 0; rank < 3; ++rank) {
            out.top[h][rank] = rank < static_cast<int>(res.ranked[h].size())
                                   ? res.ranked[h][static_cast<size_t>(rank)]
                                   : 0.0;
          }
        }
        return out;
      });

  rep.checks.push_back(check("r = 0 marginals are degenerate", true,
                             "rank 1 is identically p/p = 1 and ranks 2+ are 0 on "
                             "both sides; KS = 0 exactly"));
  for (size_t h = 0; h < heights.size(); ++h) {
    for (int rank = 0; rank < 3; ++rank) {
      std::vector<double> a, b;
      a.reserve(n_samples);
      b.reserve(n_samples);
      for (const auto& d : discrete) a.push_back(d.top[h][rank]);
      for (const auto& c : continuum) b.push_back(c.top[h][rank]);
      auto ks = ks_two_sample(a, b);
      std::ostringstream name;
      name << "KS rank " << rank + 1 << " at r = " << r_grid[h];
      rep.checks.push_back(check(name.str(), ks.pass_1pct(),
                                 "D = " + fmt(ks.statistic) +
                                     " crit(1%) = " + fmt(ks.critical_1pct)));
    }
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criteria 6 and 7: cutoff mass and frozen-hole heights
// ---------------------------------------------------------------------------

Report cutoff_experiment(const RunContext& ctx, int p, std::vector<double> eps_ladder,
                         size_t n_runs, double delta_height) {
  Timer timer;
  Report rep;
  rep.experiment = "cutoff";
  static WeightTable w(1 << 18);
  const int height_needed =
      static_cast<int>(std::ceil(delta_height * std::sqrt(static_cast<double>(p))));

  struct RunStats {
    double lost_mass;
    double frozen_f;
    bool tall_tentacle;
  };
  struct LadderStats {
    MedianEstimate lost;
    MeanAccumulator frozen;
    BinomialEstimate tall;
  };
  std::vector<LadderStats> ladder;

  for (size_t ei = 0; ei < eps_ladder.size(); ++ei) {
    double eps = eps_ladder[ei];
    auto runs = parallel_map<RunStats>(
        n_runs, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          ExploreConfig cfg;
          cfg.cutoff_fraction = eps;
          cfg.track_lost = true;
          auto tr = explore(p, cfg, sample_key(ctx.seed, tag::kCutoff + ei, i), *laws);
          RunStats out{};
          out.lost_mass = tr.lost_mass();
          KahanSum fsum;
          for (const auto& fz : tr.frozen) fsum.add(w.f(fz.perimeter));
          out.frozen_f = fsum.value() / std::pow(static_cast<double>(p), 3);
          // Fill each frozen hole independently and look for a tall one.
          out.tall_tentacle = false;
          for (const auto& fz : tr.frozen) {
            ExploreConfig fill;
            fill.max_height = height_needed;
            fill.record_snapshots = false;
            auto filled = explore(fz.perimeter, fill,
                                  derive_key(fz.stream_key, salt::kFill), *laws);
            if (filled.max_vertex_height >= height_needed) {
              out.tall_tentacle = true;
              break;
            }
          }
          return out;
        });
    LadderStats st;
    std::vector<double> lost;
    size_t talls = 0;
    for (const auto& r : runs) {
      lost.push_back(r.lost_mass);
      st.frozen.add(r.frozen_f);
      talls += r.tall_tentacle ? 1 : 0;
    }
    st.lost = median_estimate(lost);
    st.tall = binomial_estimate(talls, n_runs);
    ladder.push_back(st);
    rep.checks.push_back(check(
        "eps = " + fmt(eps) + " summary", true,
        "median lost mass " + fmt(st.lost.median) + " (se " + fmt(st.lost.std_error) +
            "), frozen f-mass " + fmt(st.frozen.mean()) + " (se " +
            fmt(st.frozen.std_error()) + "), P(tall) " + fmt(st.tall.p_hat) +
            " (se " + fmt(st.tall.std_error) + ")"));
  }

  for (size_t i = 0; i + 1 < ladder.size(); ++i) {
    // eps decreases along the ladder; each statistic must decrease, up to
    // two combined standard errors.
    const auto& hi = ladder[i];
    const auto& lo = ladder[i + 1];
    double se_lost = std::sqrt(hi.lost.std_error * hi.lost.std_error +
                               lo.lost.std_error * lo.lost.std_error);
    rep.checks.push_back(check(
        "lost mass decreasing: eps " + fmt(eps_ladder[i]) + " -> " + fmt(eps_ladder[i + 1]),
        lo.lost.median < hi.lost.median + 2.0 * se_lost,
        fmt(hi.lost.median) + " -> " + fmt(lo.lost.median)));
    double se_frozen = std::sqrt(hi.frozen.std_error() * hi.frozen.std_error() +
                                 lo.frozen.std_error() * lo.frozen.std_error());
    rep.checks.push_back(check(
        "frozen f-mass decreasing: eps " + fmt(eps_ladder[i]) + " -> " +
            fmt(eps_ladder[i + 1]),
        lo.frozen.mean() < hi.frozen.mean() + 2.0 * se_frozen,
        fmt(hi.frozen.mean()) + " -> " + fmt(lo.frozen.mean())));
    double se_tall = std::sqrt(hi.tall.std_error * hi.tall.std_error +
                               lo.tall.std_error * lo.tall.std_error);
    rep.checks.push_back(check(
        "P(tall tentacle) nonincreasing: eps " + fmt(eps_ladder[i]) + " -> " +
            fmt(eps_ladder[i + 1]),
        lo.tall.p_hat <= hi.tall.p_hat + 2.0 * se_tall,
        fmt(hi.tall.p_hat) + " -> " + fmt(lo.tall.p_hat)));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 8: total height vs extinction time
// ---------------------------------------------------------------------------

Report height_experiment(const RunContext& ctx, int p, size_t n_samples) {
  Timer timer;
  Report rep;
  rep.experiment = "height_vs_extinction";
  static WeightTable w(1 << 18);
  const double sqrt_p = std::sqrt(static_cast<double>(p));

  auto discrete = parallel_map<double>(
      n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
      [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
        ExploreConfig cfg;
        cfg.record_snapshots = false;
        cfg.max_height = 64 * static_cast<int>(sqrt_p);
        auto tr = explore(p, cfg, sample_key(ctx.seed, tag::kHeightD, i), *laws);
        return tr.max_vertex_height / sqrt_p;
      });

  XiModel model(XiConfig{3e-2, true});
  const double floor = 3e-3;
  QuantileTable stubs = build_lifetime_stub_table(
      model, floor, 3000, derive_key(ctx.seed, tag::kHeightStub), floor / 2.0);
  const double scale = ModelConstants::get().a_triangle /
                       (2.0 * ModelConstants::get().t_triangle);
  auto continuum = parallel_map<double>(
      n_samples, ctx.threads, [] { return 0; },
      [&](int&, size_t i) {
        CellSystemConfig cfg;
        cfg.x0 = 1.0;
        cfg.mass_floor = floor;
        cfg.absorb_mass = floor / 2.0;
        cfg.need_extinction = true;
        cfg.lifetime_stubs = &stubs;
        double ext =
            simulate_cell_system(model, cfg, sample_key(ctx.seed, tag::kHeightC, i))
                .extinction;
        // extinction is reported at grid resolution
        double grid = 1e-3;
        return scale * std::ceil(ext / grid) * grid;
      });

  bool positive = true;
  for (double v : discrete) positive = positive && v > 0.0;
  for (double v : continuum) positive = positive && v > 0.0;
  rep.checks.push_back(check("all heights and extinction times positive", positive, ""));

  auto ks = ks_two_sample(discrete, continuum);
  rep.checks.push_back(check(
      "KS: p^{-1/2} Height vs (a/2t) extinction", ks.pass_1pct(),
      "D = " + fmt(ks.statistic) + " crit(1%) = " + fmt(ks.critical_1pct) +
          " scale = " + fmt(scale)));

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 9: continuum internal checks
// ---------------------------------------------------------------------------

Report continuum_experiment(const RunContext& ctx, size_t n_paths) {
  Timer timer;
  Report rep;
  rep.experiment = "continuum_checks";

  {
    // One pass over the delta = 1e-4 sampler drives three comparisons via
    // shared noise. The halving partner at delta = 5e-5 is the same path
    // plus the [5e-5, 1e-4) band, which arrives ~1.2e6 jumps per path of
    // size ~7e-5 each: it is represented by a Gaussian with the band's
    // exact compensated mean and variance (its skew enters the measured
    // shift at the 1e-10 level, seven digits under the shift itself). The
    // Laplace check runs on the variance-matched (proxied) delta = 1e-4
    // values of the actual sampler.
    const double d_fine = 5e-5, d_coarse = 1e-4;
    XiModel coarse(XiConfig{d_coarse, false});
    XiModel coarse_proxied(XiConfig{d_coarse, true});
    const double proxy_sigma2 = coarse_proxied.proxy_sigma2();
    // The compensated band has mean zero by construction: the drift
    // difference between the two truncation levels cancels the band's jump
    // mean exactly.
    const double band_var = nu_band_log_variance(d_fine, d_coarse);

    struct PathOut {
      double fine_pure;
      double coarse_pure;
      double coarse_proxy;
    };
    auto paths = parallel_map<PathOut>(
        n_paths, ctx.threads, [] { return 0; },
        [&](int&, size_t i) {
          RandomStream rs(sample_key(ctx.seed, tag::kLaplace, i));
          PathOut out;
          out.coarse_pure = coarse.terminal_value(1.0, rs);
          out.coarse_proxy = out.coarse_pure + std::sqrt(proxy_sigma2) * rs.next_normal();
          out.fine_pure = out.coarse_pure + std::sqrt(band_var) * rs.next_normal();
          return out;
        });

    MeanAccumulator mean_xi;
    MeanAccumulator lap[3], lap_fine[3], lap_shift[3];
    const double qs[3] = {0.5, 1.0, 2.0};
    for (const auto& pth : paths) {
      mean_xi.add(pth.fine_pure);
      for (int qi = 0; qi < 3; ++qi) {
        double ec = std::exp(qs[qi] * pth.coarse_proxy);
        double ef = std::exp(qs[qi] * pth.fine_pure);
        double ep = std::exp(qs[qi] * pth.coarse_pure);
        lap[qi].add(ec);
        lap_fine[qi].add(ef);
        lap_shift[qi].add(ep - ef);
      }
    }
    double drift_target = psi_prime0_closed();
    rep.checks.push_back(check(
        "E[xi(1)] = psi'(0)",
        std::fabs(mean_xi.mean() - drift_target) <= 3.0 * mean_xi.std_error(),
        "mean " + fmt(mean_xi.mean()) + " target " + fmt(drift_target) + " [" +
            fmt(std::fabs(mean_xi.mean() - drift_target) / mean_xi.std_error()) +
            " SE]"));
    for (int qi = 0; qi < 3; ++qi) {
      double target = std::exp(psi(qs[qi]));
      double d = std::fabs(lap[qi].mean() - target);
      rep.checks.push_back(check(
          "Laplace transform at q = " + fmt(qs[qi]), d <= 3.0 * lap[qi].std_error(),
          "MC " + fmt(lap[qi].mean()) + " e^psi " + fmt(target) + " [" +
              fmt(d / lap[qi].std_error()) +
              " SE] (delta 1e-4, variance-matched truncation)"));
      double shift = std::fabs(lap_shift[qi].mean());
      rep.checks.push_back(check(
          "truncation halving stability at q = " + fmt(qs[qi]),
          shift <= lap_fine[qi].std_error(),
          "coupled shift " + fmt(lap_shift[qi].mean()) + " vs one SE " +
              fmt(lap_fine[qi].std_error())));
    }
  }

  {
    XiModel model(XiConfig{1e-3, true});
    const size_t n = 10000;
    auto a = parallel_map<double>(
        n, ctx.threads, [] { return 0; },
        [&](int&, size_t i) {
          return 4.0 * pssmp_values(model, -0.5, 1.0, {0.05},
                                    sample_key(ctx.seed, tag::kSelfSim, i), 1e-10)[0];
        });
    auto b = parallel_map<double>(
        n, ctx.threads, [] { return 0; },
        [&](int&, size_t i) {
          return pssmp_values(model, -0.5, 4.0, {0.1},
                              sample_key(ctx.seed, tag::kSelfSim + 1, i), 4e-10)[0];
        });
    auto ks = ks_two_sample(a, b);
    rep.checks.push_back(
        check("self-similarity KS (c = 4, t = 0.1)", ks.pass_1pct(),
              "D = " + fmt(ks.statistic) + " crit(1%) = " + fmt(ks.critical_1pct)));
  }

  {
    // X~(t) = X(int ds / X~) pathwise on shared noise, compared at grid
    // resolution with the cadlag neighbour allowance at jump straddles.
    XiModel model(XiConfig{3e-2, true});
    const double dt = 2e-5;
    const int steps = 5000;
    double worst_overall = 0.0;
    for (uint64_t k = 0; k < 3; ++k) {
      uint64_t key = sample_key(ctx.seed, tag::kPathId, k);
      std::vector<double> times(static_cast<size_t>(steps));
      for (int i = 0; i < steps; ++i) times[static_cast<size_t>(i)] = dt * (i + 1);
      auto xt = pssmp_values(model, -1.5, 1.0, times, key, 1e-12);
      size_t live = 0;
      while (live < times.size() && xt[live] > 0.25) ++live;
      std::vector<double> clock(live);
      double acc = 0.0, prev = 1.0;
      for (size_t i = 0; i < live; ++i) {
        acc += 0.5 * dt * (1.0 / prev + 1.0 / xt[i]);
        clock[i] = acc;
        prev = xt[i];
      }
      auto xc = pssmp_values(model, -0.5, 1.0, clock, key, 1e-12);
      for (size_t i = 1; i + 1 < live; ++i) {
        double d = std::fabs(xt[i] - xc[i]);
        d = std::min(d, std::fabs(xt[i - 1] - xc[i]));
        d = std::min(d, std::fabs(xt[i + 1] - xc[i]));
        worst_overall = std::max(worst_overall, d);
      }
    }
    rep.checks.push_back(check("index -3/2 vs -1/2 time-change identity",
                               worst_overall <= 1e-3,
                               "sup deviation " + fmt(worst_overall)));
  }

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion 10: reproducibility across thread counts
// ---------------------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Report reproducibility_experiment(const RunContext& ctx) {
  Timer timer;
  Report rep;
  rep.experiment = "reproducibility";
  auto base = ctx.out_dir.empty()
                  ? std::filesystem::temp_directory_path() / "trigf_repro"
                  : ctx.out_dir / "repro";
  std::vector<std::string> files = {"snapshots.csv", "genealogy.csv",
                                    "martingales.csv", "summary.csv"};
  RunContext a = ctx, b = ctx;
  a.threads = 1;
  a.out_dir = base / "t1";
  b.threads = 2;
  b.out_dir = base / "t2";
  export_explorations(a, 50, 100, 0.0, -1, true);
  export_explorations(b, 50, 100, 0.0, -1, true);
  bool same = true;
  for (const auto& f : files) {
    same = same && slurp(a.out_dir / f) == slurp(b.out_dir / f);
  }
  rep.checks.push_back(check("exploration CSVs byte-identical across 1 vs 2 threads",
                             same, base.string()));

  RunContext ga = ctx, gb = ctx;
  ga.threads = 1;
  ga.out_dir = base / "g1";
  gb.threads = 2;
  gb.out_dir = base / "g2";
  export_cell_systems(ga, 1.0, 0.02, 1e-2, 2.0, 50);
  export_cell_systems(gb, 1.0, 0.02, 1e-2, 2.0, 50);
  bool same_g = slurp(ga.out_dir / "masses.csv") == slurp(gb.out_dir / "masses.csv") &&
                slurp(ga.out_dir / "extinction.csv") ==
                    slurp(gb.out_dir / "extinction.csv");
  rep.checks.push_back(
      check("cell-system CSVs byte-identical across 1 vs 2 threads", same_g, ""));

  rep.runtime_seconds = timer.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// CLI exports
// ---------------------------------------------------------------------------

void export_weights_json(const std::filesystem::path& file, int p_max,
                         int counts_n_max, int counts_p_max, uint64_t seed) {
  WeightTable w(std::max(p_max, 3));
  nlohmann::json j;
  j["version"] = version_string();
  j["seed"] = seed;
  j["p_max"] = p_max;
  const auto& c = ModelConstants::get();
  j["constants"] = {{"t_triangle", c.t_triangle},
                    {"a_triangle", c.a_triangle},
                    {"time_factor", c.time_factor},
                    {"boltzmann_weight", c.boltzmann_weight}};
  auto& logz = j["log_z"] = nlohmann::json::array();
  auto& fv = j["f"] = nlohmann::json::array();
  auto& gv = j["g"] = nlohmann::json::array();
  for (int p = 1; p <= p_max; ++p) {
    logz.push_back(w.log_z(p));
    fv.push_back(w.f(p));
    gv.push_back(w.g(p));
  }
  if (counts_n_max >= 0 && counts_p_max >= 1) {
    CountTable t = count_oracle_dp(counts_n_max, counts_p_max);
    auto& counts = j["counts"] = nlohmann::json::array();
    for (int n = 0; n <= counts_n_max; ++n) {
      for (int p = 1; p <= counts_p_max; ++p) {
        counts.push_back({{"n", n}, {"p", p}, {"count", t.at(n, p).str()}});
      }
    }
  }
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  out << j.dump(2) << "\n";
}

void export_step_law(const std::filesystem::path& file, int p, bool llc_row,
                     const std::string& format, uint64_t seed) {
  WeightTable w(std::max(p + 2, 4));
  uint64_t hash = config_hash({{"p", std::to_string(p)},
                               {"llc", llc_row ? "1" : "0"},
                               {"format", format}});
  if (format == "csv") {
    CsvWriter csv(file, llc_row ? "target,mass" : "event,k,mass", seed, hash);
    if (llc_row) {
      for (auto [q, mass] : LlcKernel(p, w).row()) {
        csv.row({std::to_string(q), format_double(mass)});
      }
    } else {
      StepMasses m = step_law_masses(p, w);
      csv.row({"C", "-1", format_double(m.prob_c)});
      for (int k = 0; k < p; ++k) {
        csv.row({"G", std::to_string(k), format_double(m.prob_g[static_cast<size_t>(k)])});
      }
      if (p == 2) csv.row({"V", "-1", format_double(m.prob_v)});
    }
    return;
  }
  nlohmann::json j;
  j["version"] = version_string();
  j["p"] = p;
  if (llc_row) {
    auto& row = j["row"] = nlohmann::json::array();
    for (auto [q, mass] : LlcKernel(p, w).row()) {
      row.push_back({{"target", q}, {"mass", mass}});
    }
  } else {
    StepMasses m = step_law_masses(p, w);
    j["prob_c"] = m.prob_c;
    j["prob_g"] = m.prob_g;
    j["prob_v"] = m.prob_v;
  }
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  out << j.dump(2) << "\n";
}

void export_explorations(const RunContext& ctx, int p0, size_t n_samples,
                         double cutoff, int max_height, bool synchronized) {
  static WeightTable w(1 << 18);
  uint64_t hash = config_hash({{"p", std::to_string(p0)},
                               {"samples", std::to_string(n_samples)},
                               {"cutoff", format_double(cutoff)},
                               {"max_height", std::to_string(max_height)},
                               {"sync", synchronized ? "1" : "0"}});
  auto traces = parallel_map<ExplorationTrace>(
      n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
      [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
        ExploreConfig cfg;
        cfg.cutoff_fraction = cutoff;
        cfg.track_lost = cutoff > 0.0;
        cfg.max_height = max_height;
        cfg.synchronized = synchronized;
        cfg.martingale_paths = synchronized;
        cfg.record_genealogy = true;
        return explore(p0, cfg, sample_key(ctx.seed, tag::kExport, i), *laws);
      });

  CsvWriter snapshots(ctx.out_dir / "snapshots.csv", "sample_id,height,rank,perimeter",
                      ctx.seed, hash);
  CsvWriter genealogy(ctx.out_dir / "genealogy.csv",
                      "sample_id,label,parent,birth_height,birth_perimeter", ctx.seed,
                      hash);
  CsvWriter martingales(ctx.out_dir / "martingales.csv", "sample_id,r,M,V", ctx.seed,
                        hash);
  CsvWriter summary(ctx.out_dir / "summary.csv", "sample_id,volume,height,steps",
                    ctx.seed, hash);
  for (size_t i = 0; i < traces.size(); ++i) {
    const auto& tr = traces[i];
    std::string id = std::to_string(i);
    for (const auto& [r, perims] : tr.snapshots) {
      for (size_t rank = 0; rank < perims.size(); ++rank) {
        snapshots.row({id, std::to_string(r), std::to_string(rank + 1),
                       std::to_string(perims[rank])});
      }
    }
    std::vector<std::pair<std::string, const GenealogyEntry*>> rows;
    for (const auto& g : tr.genealogy) {
      rows.emplace_back(genealogy_label(tr.genealogy, g.id), &g);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [label, g] : rows) {
      std::string parent = g->id == 0 ? "-" : genealogy_label(tr.genealogy, g->parent);
      genealogy.row({id, label, parent, std::to_string(g->birth_height),
                     std::to_string(g->birth_perimeter)});
    }
    for (size_t r = 0; r < tr.m_path.size(); ++r) {
      martingales.row({id, std::to_string(r), format_double(tr.m_path[r]),
                       format_double(tr.v_path[r])});
    }
    summary.row({id, std::to_string(tr.volume), std::to_string(tr.max_vertex_height),
                 std::to_string(tr.steps)});
  }
}

void export_llc(const RunContext& ctx, const std::filesystem::path& file, int p0,
                size_t n_samples, bool heights) {
  static WeightTable w(1 << 18);
  uint64_t hash = config_hash({{"p", std::to_string(p0)},
                               {"samples", std::to_string(n_samples)},
                               {"heights", heights ? "1" : "0"}});
  CsvWriter csv(file, heights ? "sample_id,height,value" : "sample_id,step,value",
                ctx.seed, hash);
  if (heights) {
    auto paths = parallel_map<LlcHeightPath>(
        n_samples, ctx.threads, [&] { return std::make_unique<StepLawCache>(w); },
        [&](std::unique_ptr<StepLawCache>& laws, size_t i) {
          return llc_at_heights(p0, sample_key(ctx.seed, tag::kExport + 1, i), *laws);
        });
    for (size_t i = 0; i < paths.size(); ++i) {
      for (size_t r = 0; r < paths[i].values.size(); ++r) {
        csv.row({std::to_string(i), std::to_string(r),
                 std::to_string(paths[i].values[r])});
      }
    }
  } else {
    auto paths = parallel_map<LlcPath>(
        n_samples, ctx.threads, [&] { return std::make_unique<LlcKernelCache>(w); },
        [&](std::unique_ptr<LlcKernelCache>& kernels, size_t i) {
          return simulate_llc(p0, sample_key(ctx.seed, tag::kExport + 2, i), *kernels);
        });
    for (size_t i = 0; i < paths.size(); ++i) {
      for (size_t s = 0; s < paths[i].values.size(); ++s) {
        csv.row({std::to_string(i), std::to_string(s),
                 std::to_string(paths[i].values[s])});
      }
    }
  }
}

void export_cell_systems(const RunContext& ctx, double x0, double mass_floor,
                         double delta, double horizon, size_t n_samples) {
  XiModel model(XiConfig{delta, true});
  uint64_t hash = config_hash({{"x0", format_double(x0)},
                               {"floor", format_double(mass_floor)},
                               {"delta", format_double(delta)},
                               {"horizon", format_double(horizon)},
                               {"samples", std::to_string(n_samples)}});
  std::vector<double> grid;
  for (double t = 0.0; t <= horizon; t += 0.05) grid.push_back(t);
  auto results = parallel_map<CellSystemResult>(
      n_samples, ctx.threads, [] { return 0; },
      [&](int&, size_t i) {
        CellSystemConfig cfg;
        cfg.x0 = x0;
        cfg.mass_floor = mass_floor;
        cfg.query_times = grid;
        cfg.need_extinction = true;
        return simulate_cell_system(model, cfg,
                                    sample_key(ctx.seed, tag::kExport + 3, i));
      });
  CsvWriter masses(ctx.out_dir / "masses.csv", "sample_id,time,rank,mass", ctx.seed,
                   hash);
  CsvWriter ext(ctx.out_dir / "extinction.csv", "sample_id,extinction", ctx.seed, hash);
  for (size_t i = 0; i < results.size(); ++i) {
    for (size_t t = 0; t < grid.size(); ++t) {
      const auto& ranked = results[i].ranked[t];
      for (size_t rank = 0; rank < ranked.size(); ++rank) {
        masses.row({std::to_string(i), format_double(grid[t]),
                    std::to_string(rank + 1), format_double(ranked[rank])});
      }
    }
    ext.row({std::to_string(i), format_double(results[i].extinction)});
  }
}

void export_cumulants(const std::filesystem::path& file, double q_lo, double q_hi,
                      double q_step, uint64_t seed) {
  uint64_t hash = config_hash({{"q_lo", format_double(q_lo)},
                               {"q_hi", format_double(q_hi)},
                               {"q_step", format_double(q_step)}});
  CsvWriter csv(file, "q,psi,kappa", seed, hash);
  for (double q = q_lo; q <= q_hi + 1e-12; q += q_step) {
    std::string kap = q > 1.5 ? format_double(kappa(q)) : "";
    csv.row({format_double(q), format_double(psi(q)), kap});
  }
}

}  // namespace trigf
