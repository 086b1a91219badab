// Statistical acceptance suite: one PASS/FAIL line per criterion, nonzero
// exit on any failure. Criteria 4, 5 and 9 are Monte Carlo heavy; on one
// core the full suite takes a few hours. Individual criteria can be selected
// with --only.
//
// All tolerances are fixed here: exact identities at 1e-10/1e-7/1e-6,
// martingale means within 3 standard errors, two-sample KS tests at the 1%
// level, monotonicity ladders within 2 standard errors.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <string>

#include "trigf/harness.hpp"

namespace {

struct Outcome {
  int criterion;
  std::string title;
  bool pass;
  double seconds;
};

void announce(const trigf::Report& rep) {
  for (const auto& c : rep.checks) {
    std::printf("    [%s] %s%s%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : ": ", c.detail.c_str());
  }
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  trigf::RunContext ctx;
  ctx.seed = 20260809;
  ctx.threads = 1;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) {
      ctx.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
      ctx.threads = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
      ctx.out_dir = argv[++i];
    }
  }
  auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  std::vector<Outcome> outcomes;
  auto run = [&](int criterion, const std::string& title, auto&& fn) {
    if (!wanted(criterion)) return;
    std::printf("criterion %d: %s\n", criterion, title.c_str());
    std::fflush(stdout);
    trigf::Report rep = fn();
    announce(rep);
    outcomes.push_back({criterion, title, rep.all_pass(), rep.runtime_seconds});
    if (!ctx.out_dir.empty()) {
      std::filesystem::create_directories(ctx.out_dir);
      std::ofstream out(ctx.out_dir /
                        ("criterion_" + std::to_string(criterion) + ".json"));
      out << rep.to_json(ctx.seed) << "\n";
    }
  };

  run(1, "exact identities", [&] { return trigf::validate_exact_suite(10000); });
  run(2, "martingale Monte Carlo",
      [&] { return trigf::martingale_experiment(ctx, 100000, 100000); });
  run(3, "UIPT h-transform", [&] { return trigf::uipt_experiment(ctx, 1000000); });
  run(4, "locally-largest scaling",
      [&] { return trigf::llc_scaling_experiment(ctx, 10000); });
  run(5, "theorem-1 ranked marginals",
      [&] { return trigf::theorem1_experiment(ctx, 1000, {0.2, 0.5, 1.0}, 10000); });
  // Criteria 6 and 7 are tabulated from the same frozen explorations: one
  // pass over the cutoff ladder, split into the mass checks (6) and the
  // tall-tentacle checks (7).
  if (wanted(6) || wanted(7)) {
    std::printf("criteria 6+7: cutoff ladder at p = 2000\n");
    std::fflush(stdout);
    trigf::Report full =
        trigf::cutoff_experiment(ctx, 2000, {0.1, 0.05, 0.02, 0.01}, 200, 0.5);
    announce(full);
    trigf::Report mass, tall;
    mass.experiment = "cutoff_mass";
    tall.experiment = "theorem2_tentacles";
    mass.runtime_seconds = tall.runtime_seconds = full.runtime_seconds;
    for (const auto& c : full.checks) {
      if (c.name.find("tall") != std::string::npos) {
        tall.checks.push_back(c);
      } else if (c.name.find("summary") == std::string::npos) {
        mass.checks.push_back(c);
      }
    }
    if (wanted(6)) {
      outcomes.push_back({6, "lost and frozen mass decay", mass.all_pass(),
                          full.runtime_seconds});
    }
    if (wanted(7)) {
      outcomes.push_back({7, "tall-tentacle probability ladder", tall.all_pass(), 0.0});
    }
    if (!ctx.out_dir.empty()) {
      std::filesystem::create_directories(ctx.out_dir);
      std::ofstream out(ctx.out_dir / "criterion_6_7.json");
      out << full.to_json(ctx.seed) << "\n";
    }
  }
  run(8, "height vs extinction", [&] { return trigf::height_experiment(ctx, 400, 5000); });
  run(9, "continuum internal checks",
      [&] { return trigf::continuum_experiment(ctx, 1000000); });
  run(10, "byte-identical reproducibility",
      [&] { return trigf::reproducibility_experiment(ctx); });

  std::printf("\n================ acceptance summary ================\n");
  bool all = true;
  for (const auto& o : outcomes) {
    std::printf("criterion %2d [%s] %s (%.1f s)\n", o.criterion,
                o.pass ? "PASS" : "FAIL", o.title.c_str(), o.seconds);
    all = all && o.pass;
  }
  std::printf("overall: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
