#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lattice/config.hpp"

namespace lattice {

// Pipeline stages in execution order.
enum class Stage { Decay, Norms, Spectrum, NormalForm, Conjugacy };

const char* stage_name(Stage s);
// Accepts the CLI names decay|norms|spectrum|nf|conj; empty input selects
// every stage.  Unknown names raise SchemaError.
std::vector<Stage> parse_stages(const std::vector<std::string>& names);

struct StageOutcome {
  Stage stage = Stage::Decay;
  bool passed = false;
  // 0, or the exit code class of the error thrown by the stage
  int exit_code = 0;
  nlohmann::json report;
};

struct PipelineResult {
  // 0 when every requested stage passed; otherwise the code of the first
  // failing stage (2 config, 3 precondition, 4 numerical)
  int exit_code = 0;
  std::vector<StageOutcome> outcomes;
  std::vector<std::string> artifacts;  // files written, relative to out_dir
};

// Runs the requested stages in order, writing report_<stage>.json plus CSV
// dumps into out_dir.  Every failure lands in a report; stages keep running
// after a failure so diagnostics are complete.
PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::vector<Stage>& stages,
                            const std::string& out_dir);

}  // namespace lattice
