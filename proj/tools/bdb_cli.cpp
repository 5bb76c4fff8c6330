// bdb command-line front end. Talks to the shared library through the C API
// only; all numerics live behind include/bdb/bdb.h.
//
//   bdb <mode> --config <path> [--out <dir>] [--threads N]
//   modes: equilibrium | simulate | stability | illposed | norms

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bdb/bdb.h"

int main(int argc, char** argv) {
  CLI::App app{std::string("bdb ") + bdb_version() +
               " - semiconductor Boltzmann-Dirac-Benney toolbox"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int threads = 1;

  const char* mode_names[] = {"equilibrium", "simulate", "stability", "illposed", "norms"};
  const char* mode_help[] = {
      "Fermi-Dirac moments, kappa and instability margin for one multiplier pair",
      "time integration with series/snapshot output",
      "critical point, branch continuation and mode diagnostics",
      "growth-rate measurement and ill-posedness trend experiment",
      "analytic-norm tracking along a solver run"};
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(mode_names[i], mode_help[i]);
    sub->add_option("--config", config_path, "config file (INI sections)")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--threads", threads, "parallel worker slots for independent runs");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  char manifest[4096] = {0};
  const bdb_status rc = bdb_run_scenario(mode.c_str(), config_path.c_str(), out_dir.c_str(),
                                         threads, manifest, sizeof(manifest));
  if (rc != BDB_OK) {
    std::fprintf(stderr, "bdb %s failed (status %d): %s\n", mode.c_str(), rc, bdb_last_error());
    return 1;
  }
  std::printf("%s\n", manifest);
  return 0;
}
