#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lattice/errors.hpp"
#include "lattice/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"decay-structured lattice maps: norms, spectra, normal forms, "
               "and linearizing conjugacies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "reports";
  std::vector<std::string> stage_names;
  std::int64_t seed_override = -1;
  int window_scale = 1;

  CLI::App* run = app.add_subcommand("run", "run pipeline stages on a config");
  run->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  run->add_option("--stage", stage_names,
                  "stage subset: decay|norms|spectrum|nf|conj (repeatable; "
                  "default all)");
  run->add_option("--out-dir", out_dir, "report directory (default reports)");
  run->add_option("--seed-override", seed_override,
                  "replace the config sampling seed");
  run->add_option("--window-scale", window_scale,
                  "multiply the window radius (stability studies)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    lattice::ExperimentConfig cfg = lattice::load_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.radius *= window_scale;

    const std::vector<lattice::Stage> stages =
        lattice::parse_stages(stage_names);
    const lattice::PipelineResult result =
        lattice::run_pipeline(cfg, stages, out_dir);

    for (const lattice::StageOutcome& o : result.outcomes) {
      std::cout << "stage " << lattice::stage_name(o.stage) << ": "
                << (o.passed ? "ok" : "FAILED");
      if (!o.passed && o.report.contains("error"))
        std::cout << " (" << o.report["error"]["name"].get<std::string>()
                  << ": " << o.report["error"]["message"].get<std::string>()
                  << ")";
      std::cout << "\n";
    }
    std::cout << result.artifacts.size() << " artifact(s) in " << out_dir
              << "\n";
    return result.exit_code;
  } catch (const lattice::Error& e) {
    std::cerr << "error (" << e.name() << "): " << e.what() << "\n";
    switch (e.kind()) {
      case lattice::ErrorKind::Config: return 2;
      case lattice::ErrorKind::Precondition: return 3;
      case lattice::ErrorKind::Numerical: return 4;
    }
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
