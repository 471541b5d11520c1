#include <string>

#include "CLI11.hpp"

#include "gwf/cli.hpp"
#include "gwf/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gabor wave front toolkit: STFT analysis, Hamiltonian flows, "
               "Schrödinger propagators and phase-space decay checks"};
  app.set_version_flag("--version", std::string(gwf::kToolName) + " " +
                                        gwf::kToolVersion);
  app.require_subcommand(1);

  gwf::cli::RunOptions opts;
  auto* run = app.add_subcommand("run", "execute one JSON experiment config");
  run->add_option("config", opts.config_path, "path to the experiment config")
      ->required();
  run->add_option("--output-dir", opts.output_dir,
                  "artifact directory (overrides config and TOOL_OUTPUT_DIR)");
  run->add_option("--jobs", opts.jobs, "worker hint; execution is serial")
      ->check(CLI::Range(1, 256));
  run->add_option("--seed", opts.seed,
                  "override the sampling seed of flow experiments");

  CLI11_PARSE(app, argc, argv);
  return gwf::cli::run(opts);
}
