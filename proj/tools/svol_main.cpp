#include <CLI11.hpp>

#include <iostream>

#include "svol/kernels/dispatch.hpp"
#include "svol/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stochastic volatility valuation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string outdir;
  std::string backend;

  CLI::App* run = app.add_subcommand("run", "execute the task described by a config file");
  run->add_option("config", config_path, "config file path")->required();
  run->add_option("--set", overrides, "override a config key (key=value), repeatable");
  run->add_option("--out", outdir, "output directory (else output.dir or $SVOL_OUTPUT_DIR)");
  run->add_option("--backend", backend, "force kernel backend: scalar or avx2");

  CLI11_PARSE(app, argc, argv);

  if (!backend.empty()) {
    try {
      svol::kern::set_backend(backend == "avx2" ? svol::kern::Backend::Avx2
                                                : svol::kern::Backend::Scalar);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  if (!outdir.empty()) overrides.push_back("output.dir=" + outdir);

  const svol::cli::RunResult res = svol::cli::run_file(config_path, overrides);
  if (!res.summary.empty()) std::cout << res.summary << "\n";
  for (const auto& a : res.artifacts) std::cout << "wrote " << a << "\n";
  return res.exit_code;
}
