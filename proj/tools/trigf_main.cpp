// Command-line front end: enumeration dumps, simulation exports and the
// statistical experiments. All tabular output is CSV with a one-line '#'
// provenance header; reports are JSON.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "trigf/harness.hpp"
#include "trigf/io.hpp"

namespace {

void print_report(const trigf::Report& rep, const trigf::RunContext& ctx) {
  for (const auto& c : rep.checks) {
    std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : ": ", c.detail.c_str());
  }
  std::printf("%s: %s (%.1f s)\n", rep.experiment.c_str(),
              rep.all_pass() ? "PASS" : "FAIL", rep.runtime_seconds);
  if (!ctx.out_dir.empty()) {
    std::filesystem::create_directories(ctx.out_dir);
    auto file = ctx.out_dir / (rep.experiment + ".json");
    std::ofstream out(file);
    out << rep.to_json(ctx.seed) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boltzmann triangulation cycle-structure simulator"};
  app.set_config("--config", "", "flat key=value configuration file");

  trigf::RunContext ctx;
  std::string out_dir;
  app.add_option("--seed", ctx.seed, "global seed")->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker threads")->capture_default_str();
  app.add_option("--out", out_dir, "output directory or file");

  // ---- data dumps ----
  auto* weights = app.add_subcommand("weights", "partition function and weight tables");
  int w_pmax = 1000;
  std::vector<int> w_counts;
  weights->add_option("--p-max", w_pmax, "largest perimeter");
  weights->add_option("--counts", w_counts, "n_max p_max for exact big-integer counts")
      ->expected(2);

  auto* kernel = app.add_subcommand("kernel", "one-step peeling law for one perimeter");
  int k_p = 10;
  bool k_llc = false;
  std::string k_format = "json";
  kernel->add_option("--p", k_p, "perimeter")->required();
  kernel->add_flag("--llc", k_llc, "dump the locally-largest transition row");
  kernel->add_option("--format", k_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* explore_cmd = app.add_subcommand("explore", "branching peeling by layers");
  int e_p = 100, e_maxh = -1;
  size_t e_samples = 100;
  double e_cutoff = 0.0;
  bool e_sync = false;
  explore_cmd->add_option("--p", e_p, "boundary perimeter")->required();
  explore_cmd->add_option("--samples", e_samples, "number of explorations");
  explore_cmd->add_option("--cutoff", e_cutoff, "freeze cycles born below EPS*p");
  explore_cmd->add_option("--max-height", e_maxh, "height budget");
  explore_cmd->add_flag("--sync", e_sync, "layer-synchronized scheduling");

  auto* llc_cmd = app.add_subcommand("llc", "locally largest cycle chains");
  int l_p = 100;
  size_t l_samples = 100;
  bool l_heights = false;
  llc_cmd->add_option("--p", l_p, "starting perimeter")->required();
  llc_cmd->add_option("--samples", l_samples, "number of chains");
  llc_cmd->add_flag("--heights", l_heights, "height-indexed values instead of steps");

  auto* gf_cmd = app.add_subcommand("gf", "growth-fragmentation cell systems");
  double g_x0 = 1.0, g_floor = 5e-3, g_delta = 1e-2, g_horizon = 2.0;
  size_t g_samples = 100;
  gf_cmd->add_option("--x0", g_x0, "initial mass");
  gf_cmd->add_option("--floor", g_floor, "daughter mass floor");
  gf_cmd->add_option("--delta", g_delta, "jump truncation");
  gf_cmd->add_option("--horizon", g_horizon, "time horizon for the mass grid");
  gf_cmd->add_option("--samples", g_samples, "number of systems");

  auto* cumulants = app.add_subcommand("cumulants", "psi and kappa tables");
  double c_lo = 0.0, c_hi = 6.0, c_step = 0.1;
  cumulants->add_option("--q-lo", c_lo, "grid start");
  cumulants->add_option("--q-hi", c_hi, "grid end");
  cumulants->add_option("--q-step", c_step, "grid step");

  // ---- experiments ----
  auto* validate = app.add_subcommand("validate", "exact-identity suite");
  int v_pmax = 10000;
  validate->add_option("--p-max", v_pmax, "sweep bound");

  auto* th1 = app.add_subcommand("theorem1", "ranked cycle-length marginals");
  int t1_p = 1000;
  size_t t1_n = 10000;
  th1->add_option("--p", t1_p, "boundary perimeter");
  th1->add_option("--samples", t1_n, "samples per side");

  auto* th2 = app.add_subcommand("theorem2", "cutoff and frozen-hole heights");
  int t2_p = 2000;
  size_t t2_n = 200;
  th2->add_option("--p", t2_p, "boundary perimeter");
  th2->add_option("--runs", t2_n, "runs per cutoff level");

  auto* height = app.add_subcommand("height", "total height vs extinction time");
  int h_p = 400;
  size_t h_n = 5000;
  height->add_option("--p", h_p, "boundary perimeter");
  height->add_option("--samples", h_n, "samples per side");

  auto* mart = app.add_subcommand("martingales", "martingale Monte Carlo");
  size_t m_n = 100000;
  mart->add_option("--samples", m_n, "samples per configuration");

  auto* uipt = app.add_subcommand("uipt", "h-transform checks");
  size_t u_n = 1000000;
  uipt->add_option("--samples", u_n, "martingale samples");

  auto* llcscale = app.add_subcommand("llc-scaling", "chain scaling limit checks");
  size_t ls_n = 10000;
  llcscale->add_option("--samples", ls_n, "samples per side");

  auto* cont = app.add_subcommand("continuum", "Levy/Lamperti internal checks");
  size_t cn_n = 1000000;
  cont->add_option("--paths", cn_n, "terminal-value paths");

  auto* repro = app.add_subcommand("reproducibility", "byte-identical rerun check");

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  ctx.out_dir = out_dir;

  try {
    if (*weights) {
      auto file = ctx.out_dir.empty() ? std::filesystem::path("weights.json")
                                      : ctx.out_dir;
      int w_nmax = w_counts.size() == 2 ? w_counts[0] : -1;
      int w_cpmax = w_counts.size() == 2 ? w_counts[1] : -1;
      trigf::export_weights_json(file, w_pmax, w_nmax, w_cpmax, ctx.seed);
      std::printf("wrote %s\n", file.string().c_str());
    } else if (*kernel) {
      auto file = ctx.out_dir.empty()
                      ? std::filesystem::path(k_llc ? "llc_row." + k_format
                                                    : "step_law." + k_format)
                      : ctx.out_dir;
      trigf::export_step_law(file, k_p, k_llc, k_format, ctx.seed);
      std::printf("wrote %s\n", file.string().c_str());
    } else if (*explore_cmd) {
      if (ctx.out_dir.empty()) ctx.out_dir = "explore_out";
      trigf::export_explorations(ctx, e_p, e_samples, e_cutoff, e_maxh, e_sync);
      std::printf("wrote %s/{snapshots,genealogy,martingales,summary}.csv\n",
                  ctx.out_dir.string().c_str());
    } else if (*llc_cmd) {
      auto file = ctx.out_dir.empty() ? std::filesystem::path("llc.csv") : ctx.out_dir;
      trigf::export_llc(ctx, file, l_p, l_samples, l_heights);
      std::printf("wrote %s\n", file.string().c_str());
    } else if (*gf_cmd) {
      if (ctx.out_dir.empty()) ctx.out_dir = "gf_out";
      trigf::export_cell_systems(ctx, g_x0, g_floor, g_delta, g_horizon, g_samples);
      std::printf("wrote %s/{masses,extinction}.csv\n", ctx.out_dir.string().c_str());
    } else if (*cumulants) {
      auto file = ctx.out_dir.empty() ? std::filesystem::path("cumulants.csv")
                                      : ctx.out_dir;
      trigf::export_cumulants(file, c_lo, c_hi, c_step, ctx.seed);
      std::printf("wrote %s\n", file.string().c_str());
    } else if (*validate) {
      auto rep = trigf::validate_exact_suite(v_pmax);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*th1) {
      auto rep = trigf::theorem1_experiment(ctx, t1_p, {0.2, 0.5, 1.0}, t1_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*th2) {
      auto rep = trigf::cutoff_experiment(ctx, t2_p, {0.1, 0.05, 0.02, 0.01}, t2_n, 0.5);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*height) {
      auto rep = trigf::height_experiment(ctx, h_p, h_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*mart) {
      auto rep = trigf::martingale_experiment(ctx, m_n, m_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*uipt) {
      auto rep = trigf::uipt_experiment(ctx, u_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*llcscale) {
      auto rep = trigf::llc_scaling_experiment(ctx, ls_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*cont) {
      auto rep = trigf::continuum_experiment(ctx, cn_n);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    } else if (*repro) {
      auto rep = trigf::reproducibility_experiment(ctx);
      print_report(rep, ctx);
      return rep.all_pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
