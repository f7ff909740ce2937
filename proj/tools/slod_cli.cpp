#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "slod/experiment.hpp"

namespace {

void print_summary(const slod::ExperimentResult &result) {
  std::printf("%-6s %8s %3s %14s %14s %14s %12s\n", "method", "H", "m", "err_L2", "err_H1semi", "err_energy",
              "kappa");
  for (const auto &r : result.rows)
    std::printf("%-6s %8.5f %3d %14.6e %14.6e %14.6e %12.4e\n", r.method.c_str(), r.H, r.m, r.error.l2,
                r.error.h1_semi, r.error.energy, r.kappa);

  std::map<std::string, std::vector<const slod::ResultRow *>> curves;
  for (const auto &r : result.rows) curves[r.method + " m=" + std::to_string(r.m)].push_back(&r);
  for (const auto &[name, rows] : curves) {
    if (rows.size() < 2) continue;
    std::vector<std::array<double, 2>> l2, h1;
    for (const auto *r : rows) {
      l2.push_back({r->H, r->error.l2});
      h1.push_back({r->H, r->error.h1_semi});
    }
    try {
      std::printf("rate %-12s L2 %.3f  H1semi %.3f\n", name.c_str(), slod::fit_rate(l2), slod::fit_rate(h1));
    } catch (const std::invalid_argument &) {
      // zero errors or a single H value; nothing to fit
    }
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"SLOD / LOD / coarse FEM experiments for 2D linear elasticity"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "run a convergence sweep from a config file");
  std::string config_path;
  unsigned threads = 0;
  std::string out_dir;
  bool dump_bases = false;
  std::vector<std::string> diagnostics;
  run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "worker threads (overrides config)")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_flag("--dump-bases", dump_bases, "write per-basis companion vectors");
  run->add_option("--diagnostics", diagnostics, "comma list of: kappa, gram, none")
      ->delimiter(',')
      ->check(CLI::IsMember({"kappa", "gram", "none"}));

  CLI11_PARSE(app, argc, argv);

  try {
    slod::RunConfig config = slod::load_config(config_path);
    if (threads > 0) config.threads = threads;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (dump_bases) config.dump_bases = true;
    if (!diagnostics.empty()) {
      config.kappa = config.gram = false;
      for (const auto &d : diagnostics) {
        if (d == "kappa") config.kappa = true;
        if (d == "gram") config.gram = true;
      }
    }
    const slod::ExperimentResult result = slod::run_experiment(config);
    slod::write_outputs(config, result);
    print_summary(result);
    std::printf("wrote %s\n", (config.output_dir / "results.csv").string().c_str());
  } catch (const slod::ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
