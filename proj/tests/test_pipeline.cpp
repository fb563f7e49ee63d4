#include "lattice/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

using namespace lattice;
using fixtures::scalar_coeff;
using nlohmann::json;

namespace {

std::string minimal_config() {
  return R"({
    "decay": {"alpha": 2.0, "theta": 1.0, "dim": 1, "window_l": 30},
    "window": {"dim": 1, "radius": 2, "node_dim": 1},
    "map": {"linear": {"node_matrix": [[0.5]]}},
    "run": {"mode": "perturbative", "r": 2, "samples": 5, "seed": 3}
  })";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_report(const std::filesystem::path& p) {
  return json::parse(read_file(p));
}

std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing validates and aggregates") {
  SUBCASE("minimal config round trips") {
    const ExperimentConfig cfg = parse_config_text(minimal_config());
    CHECK(cfg.alpha == 2.0);
    CHECK(cfg.theta == 1.0);
    CHECK(cfg.decay_window_l == 30);
    CHECK(cfg.radius == 2);
    CHECK(cfg.node_dim == 1);
    CHECK(cfg.node_matrix(0, 0) == 0.5);
    CHECK(!cfg.linear_coupling.present);
    CHECK(cfg.polynomial.empty());
    CHECK(cfg.mode == SternbergMode::Perturbative);
    CHECK(cfg.r == 2);
    CHECK(cfg.samples == 5);
    CHECK(cfg.seed == 3);
    // defaults fill the optional knobs
    CHECK(cfg.tol == 1e-10);
    CHECK(cfg.conj_residual_tol == 1e-6);
  }

  SUBCASE("missing field is named in the error") {
    std::string text = minimal_config();
    text.replace(text.find("\"alpha\": 2.0, "), 14, "");
    try {
      parse_config_text(text);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("decay.alpha") != std::string::npos);
    }
  }

  SUBCASE("all violations are aggregated") {
    std::string text = minimal_config();
    text.replace(text.find("\"alpha\": 2.0, "), 14, "");
    text.replace(text.find("perturbative"), 12, "sideways");
    try {
      parse_config_text(text);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      const std::string what = e.what();
      CHECK(what.find("decay.alpha") != std::string::npos);
      CHECK(what.find("run.mode") != std::string::npos);
      CHECK(what.find("2 violation(s)") != std::string::npos);
    }
  }

  SUBCASE("unresolvable profile is rejected") {
    std::string text = minimal_config();
    text.replace(text.find("{\"node_matrix\": [[0.5]]}"), 24,
                 "{\"node_matrix\": [[0.5]], \"coupling\": "
                 "{\"strength\": 0.1, \"profile\": \"mystery\"}}");
    CHECK_THROWS_AS(parse_config_text(text), SchemaError);
  }

  SUBCASE("window and decay dimensions must agree") {
    std::string text = minimal_config();
    text.replace(text.find("\"window\": {\"dim\": 1"), 20,
                 "\"window\": {\"dim\": 2");
    CHECK_THROWS_AS(parse_config_text(text), SchemaError);
  }

  SUBCASE("malformed json is a parse error") {
    CHECK_THROWS_AS(parse_config_text("{\"decay\": "), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ParseError);
  }
}

TEST_CASE("scalar fixture file builds the quadratic map") {
  const ExperimentConfig cfg =
      load_config(std::string(TEST_DATA_DIR) + "/scalar_quadratic.json");
  const DecayFunction g = build_decay(cfg);
  const PolyJet f = build_map_jet(cfg, g, 2);
  CHECK(f.window().node_count() == 1);
  CHECK(scalar_coeff(f, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(scalar_coeff(f, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("deterministic map construction is window stable") {
  const ExperimentConfig base = parse_config_text(R"({
    "decay": {"alpha": 2.0, "theta": 1.0, "dim": 1, "window_l": 30},
    "window": {"dim": 1, "radius": 2, "node_dim": 1},
    "map": {"linear": {"node_matrix": [[0.5]],
                       "coupling": {"strength": 0.05}}},
    "run": {"mode": "perturbative", "r": 2, "samples": 5, "seed": 3}
  })");
  const DecayFunction g = build_decay(base);
  const BlockLinearMap small = build_linear_map(base, g);
  const BlockLinearMap big = build_linear_map(base, g, 4);
  CHECK(small.window().node_count() == 5);
  CHECK(big.window().node_count() == 9);
  // shared centered offsets produce identical blocks at both radii
  const int c_small = 2, c_big = 4;
  for (int di = -2; di <= 2; ++di)
    for (int dj = -2; dj <= 2; ++dj) {
      const Eigen::MatrixXd* bs = small.block(c_small + di, c_small + dj);
      const Eigen::MatrixXd* bb = big.block(c_big + di, c_big + dj);
      REQUIRE(bs != nullptr);
      REQUIRE(bb != nullptr);
      CHECK((*bs - *bb).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("pipeline runs the scalar fixture clean") {
  const ExperimentConfig cfg =
      load_config(std::string(TEST_DATA_DIR) + "/scalar_quadratic.json");
  const auto dir = fresh_dir("pipe_scalar");
  const PipelineResult result =
      run_pipeline(cfg, parse_stages({}), dir.string());

  CHECK(result.exit_code == 0);
  REQUIRE(result.outcomes.size() == 5);
  for (const StageOutcome& o : result.outcomes) CHECK(o.passed);

  for (const char* name :
       {"report_decay.json", "report_norms.json", "report_spectrum.json",
        "report_nf.json", "report_conj.json", "run_summary.json",
        "decay_profile.csv", "linear_map.csv", "gelfand.csv", "nf_k.csv",
        "conj_samples.csv"})
    CHECK(std::filesystem::exists(dir / name));

  const json conj = read_report(dir / "report_conj.json");
  CHECK(conj["sup_residual"].get<double>() <= 1e-6);
  CHECK(conj["selection"]["r0"].get<int>() == 2);
  CHECK(conj["selection"]["m"].get<int>() == 6);
  CHECK(conj["max_increment_ratio"].get<double>() < 1.0);

  const json nf = read_report(dir / "report_nf.json");
  CHECK(nf["resonant_orders"].empty());
  CHECK(nf["residual_max"].get<double>() <= 1e-8);

  const json summary = read_report(dir / "run_summary.json");
  CHECK(summary["exit_code"].get<int>() == 0);
  CHECK(summary["stages"].size() == 5);
}

TEST_CASE("pipeline reports identity conjugacy for a linear map") {
  const ExperimentConfig cfg = parse_config_text(minimal_config());
  const auto dir = fresh_dir("pipe_linear");
  const PipelineResult result =
      run_pipeline(cfg, parse_stages({}), dir.string());
  CHECK(result.exit_code == 0);

  const json conj = read_report(dir / "report_conj.json");
  CHECK(conj["sup_residual"].get<double>() <= 1e-12);
  for (const auto& a : conj["jet_agreement"])
    CHECK(a.get<double>() <= 1e-12);
}

TEST_CASE("pipeline surfaces resonance as a structured failure") {
  const ExperimentConfig cfg = parse_config_text(R"({
    "decay": {"alpha": 2.0, "theta": 1.0, "dim": 1, "window_l": 30},
    "window": {"dim": 1, "radius": 0, "node_dim": 2},
    "map": {"linear": {"node_matrix": [[0.5, 0.0], [0.0, 0.25]]},
            "polynomial": [{"order": 2,
                            "node_coeffs": [[0, 0, 0, 0], [1, 0, 0, 0]]}]},
    "run": {"mode": "perturbative", "r": 2, "samples": 5, "seed": 3}
  })");
  const auto dir = fresh_dir("pipe_resonant");
  const PipelineResult result =
      run_pipeline(cfg, parse_stages({}), dir.string());

  // the normal form stage absorbs the obstruction into H and stays healthy
  const json nf = read_report(dir / "report_nf.json");
  REQUIRE(nf["resonant_orders"].size() == 1);
  CHECK(nf["resonant_orders"][0].get<int>() == 2);
  CHECK(nf["passed"].get<bool>());

  // the conjugacy stage needs non-resonance and fails with exit code 3
  CHECK(result.exit_code == 3);
  const json conj = read_report(dir / "report_conj.json");
  CHECK(!conj["passed"].get<bool>());
  CHECK(conj["error"]["name"].get<std::string>() == "ResonantOrder");
}

TEST_CASE("pipeline reports are deterministic modulo timestamp") {
  const ExperimentConfig cfg =
      load_config(std::string(TEST_DATA_DIR) + "/scalar_quadratic.json");
  const auto dir_a = fresh_dir("pipe_det_a");
  const auto dir_b = fresh_dir("pipe_det_b");
  run_pipeline(cfg, parse_stages({}), dir_a.string());
  run_pipeline(cfg, parse_stages({}), dir_b.string());

  for (const char* name :
       {"report_decay.json", "report_norms.json", "report_spectrum.json",
        "report_nf.json", "report_conj.json", "run_summary.json"}) {
    json a = read_report(dir_a / name);
    json b = read_report(dir_b / name);
    a.erase("generated_at");
    b.erase("generated_at");
    CHECK(a.dump() == b.dump());
  }
  for (const char* name : {"decay_profile.csv", "linear_map.csv",
                           "gelfand.csv", "nf_k.csv", "conj_samples.csv"})
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
}

TEST_CASE("seed changes the conjugacy samples but not the verdict") {
  ExperimentConfig cfg =
      load_config(std::string(TEST_DATA_DIR) + "/scalar_quadratic.json");
  const auto dir_a = fresh_dir("pipe_seed_a");
  const auto dir_b = fresh_dir("pipe_seed_b");
  const std::vector<Stage> conj_only = parse_stages({"conj"});
  const PipelineResult ra = run_pipeline(cfg, conj_only, dir_a.string());
  cfg.seed = 99;
  const PipelineResult rb = run_pipeline(cfg, conj_only, dir_b.string());
  CHECK(ra.exit_code == 0);
  CHECK(rb.exit_code == 0);
  CHECK(read_file(dir_a / "conj_samples.csv") !=
        read_file(dir_b / "conj_samples.csv"));
}

TEST_CASE("stage selection runs the requested subset in canonical order") {
  CHECK(parse_stages({}).size() == 5);
  const std::vector<Stage> pair = parse_stages({"norms", "decay"});
  REQUIRE(pair.size() == 2);
  CHECK(pair[0] == Stage::Decay);
  CHECK(pair[1] == Stage::Norms);
  CHECK_THROWS_AS(parse_stages({"decay", "everything"}), SchemaError);

  const ExperimentConfig cfg = parse_config_text(minimal_config());
  const auto dir = fresh_dir("pipe_subset");
  const PipelineResult result = run_pipeline(cfg, pair, dir.string());
  CHECK(result.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "report_decay.json"));
  CHECK(std::filesystem::exists(dir / "report_norms.json"));
  CHECK(!std::filesystem::exists(dir / "report_conj.json"));
  CHECK(std::filesystem::exists(dir / "run_summary.json"));
}
