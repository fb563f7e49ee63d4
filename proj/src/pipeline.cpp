#include "lattice/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include "lattice/errors.hpp"
#include "lattice/normal_form.hpp"
#include "lattice/spectrum.hpp"
#include "lattice/sternberg.hpp"

namespace lattice {

namespace {

using nlohmann::json;

std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Precondition: return 3;
    case ErrorKind::Numerical: return 4;
  }
  return 4;
}

// Files are only registered as artifacts after a successful write, so a
// failed stage never advertises partial output.
class ArtifactWriter {
 public:
  ArtifactWriter(std::string out_dir, std::vector<std::string>& artifacts)
      : out_dir_(std::move(out_dir)), artifacts_(artifacts) {}

  void write_text(const std::string& name, const std::string& body) {
    const std::filesystem::path path =
        std::filesystem::path(out_dir_) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Overflow("pipeline: cannot write " + path.string());
    artifacts_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) {
    write_text(name, j.dump(2) + "\n");
  }

 private:
  std::string out_dir_;
  std::vector<std::string>& artifacts_;
};

SpectralBounds bounds_for_mode(const ExperimentConfig& cfg,
                               const BlockLinearMap& m_op,
                               const DecayFunction& g) {
  if (cfg.mode == SternbergMode::Spectral)
    return gelfand_spectrum_bounds(m_op, g, 128);
  return node_spectrum_bounds(m_op);
}

int jet_degree_for(const ExperimentConfig& cfg, int needed) {
  int degree = std::max(needed, 2);
  for (const PolyTermSpec& term : cfg.polynomial)
    degree = std::max(degree, term.order);
  return degree;
}

std::vector<LatticeVector> draw_samples(const LatticeWindow& w,
                                        std::uint64_t seed, int count,
                                        double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<LatticeVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    LatticeVector v(w);
    for (int i = 0; i < w.scalar_dim(); ++i) v.data()(i) = u(rng);
    out.push_back(std::move(v));
  }
  return out;
}

json decay_report_json(const DecayReport& r) {
  return json{{"dim", r.dim_m},
              {"window_l", r.window_L},
              {"window_sum", r.window_sum},
              {"tail_bound", r.tail_bound},
              {"sum_margin", r.sum_margin},
              {"sum_ok", r.sum_ok},
              {"conv_margin", r.conv_margin},
              {"conv_ok", r.conv_ok},
              {"conv_mode", r.conv_mode}};
}

json stage_decay(const ExperimentConfig& cfg, ArtifactWriter& files,
                 bool* passed) {
  const DecayFunction g = build_decay(cfg);
  const DecayReport cert = g.certificate().has_value()
                               ? *g.certificate()
                               : verify_decay(g, cfg.decay_window_l);
  json report{{"alpha", g.alpha()},
              {"theta", g.theta()},
              {"dim", g.dim()},
              {"window_l", cfg.decay_window_l},
              {"amplitude", g.amplitude()},
              {"gamma0", g.amplitude()},
              {"gamma0_inverse", 1.0 / g.amplitude()},
              {"verification", decay_report_json(cert)}};

  std::string csv = "radius,value\n";
  for (int r = 0; r <= 2 * cfg.decay_window_l; ++r) {
    const double v = (r == 0) ? g.amplitude() : g.at_radius(r);
    csv += std::to_string(r) + "," + csv_double(v) + "\n";
  }
  files.write_text("decay_profile.csv", csv);

  *passed = cert.passed();
  return report;
}

json stage_norms(const ExperimentConfig& cfg, ArtifactWriter& files,
                 bool* passed) {
  const DecayFunction g = build_decay(cfg);
  const BlockLinearMap m_op = build_linear_map(cfg, g);
  const BlockLinearMap m_inv = invert_linear(m_op);

  const double op = op_norm(m_op);
  const double gv = gamma_value(m_op, g);
  const double gn = gamma_norm(m_op, g);
  const double inv_op = op_norm(m_inv);
  const double inv_gn = gamma_norm(m_inv, g);
  json report{{"op_norm", op},
              {"gamma_value", gv},
              {"gamma_norm", gn},
              {"inverse_op_norm", inv_op},
              {"inverse_gamma_norm", inv_gn},
              {"identity_gamma_norm", 1.0 / g.amplitude()},
              {"block_count", m_op.block_count()}};
  if (!cfg.linear_coupling.present) {
    // uncoupled operators satisfy |A|_G = G(0)^-1 |a| exactly
    report["uncoupled_identity_gap"] =
        std::abs(gn - block_norm(cfg.node_matrix) / g.amplitude());
  }

  std::string csv = "i,j,row,col,value\n";
  m_op.for_each_block([&](int i, int j, const Eigen::MatrixXd& b) {
    for (int r = 0; r < b.rows(); ++r)
      for (int c = 0; c < b.cols(); ++c)
        csv += std::to_string(i) + "," + std::to_string(j) + "," +
               std::to_string(r) + "," + std::to_string(c) + "," +
               csv_double(b(r, c)) + "\n";
  });
  files.write_text("linear_map.csv", csv);

  *passed = std::isfinite(op) && std::isfinite(gv) && std::isfinite(gn) &&
            std::isfinite(inv_op) && std::isfinite(inv_gn);
  return report;
}

json gelfand_json(const GelfandSequence& seq) {
  return json{{"powers", seq.powers},
              {"values", seq.values},
              {"running_inf", seq.running_inf},
              {"estimate", seq.estimate}};
}

json stage_spectrum(const ExperimentConfig& cfg, ArtifactWriter& files,
                    bool* passed) {
  const DecayFunction g = build_decay(cfg);
  const BlockLinearMap m_op = build_linear_map(cfg, g);
  const GelfandSequence fwd = gelfand_sequence(m_op, g, 128);
  const GelfandSequence bwd = gelfand_sequence(invert_linear(m_op), g, 128);
  const SpectralBounds node = node_spectrum_bounds(m_op);
  const SpectralBounds selected = bounds_for_mode(cfg, m_op, g);

  json report{{"gelfand_forward", gelfand_json(fwd)},
              {"gelfand_inverse", gelfand_json(bwd)},
              {"node_alpha", node.alpha},
              {"node_beta", node.beta},
              {"gamma_alpha", 1.0 / bwd.estimate},
              {"gamma_beta", fwd.estimate},
              {"mode", cfg.mode == SternbergMode::Spectral ? "spectral"
                                                           : "perturbative"},
              {"alpha", selected.alpha},
              {"beta", selected.beta}};

  std::string csv = "operator,power,value,running_inf\n";
  const auto dump = [&](const char* tag, const GelfandSequence& seq) {
    for (std::size_t t = 0; t < seq.powers.size(); ++t)
      csv += std::string(tag) + "," + std::to_string(seq.powers[t]) + "," +
             csv_double(seq.values[t]) + "," +
             csv_double(seq.running_inf[t]) + "\n";
  };
  dump("forward", fwd);
  dump("inverse", bwd);
  files.write_text("gelfand.csv", csv);

  *passed = selected.beta < 1.0 && selected.alpha > 0.0;
  return report;
}

json homological_json(const HomologicalInfo& info) {
  return json{{"method", info.method},
              {"condition", info.condition},
              {"residual", info.residual},
              {"iterations", info.iterations},
              {"contraction", info.contraction}};
}

int nf_order_for(const ExperimentConfig& cfg, const DecayFunction& g) {
  if (cfg.r >= 2) return cfg.r;
  const BlockLinearMap m_op = build_linear_map(cfg, g);
  const SpectralBounds b = bounds_for_mode(cfg, m_op, g);
  return select_m_delta(b.alpha, b.beta, g.amplitude(), 0, cfg.mode).r0;
}

json stage_normal_form(const ExperimentConfig& cfg, ArtifactWriter& files,
                       bool* passed) {
  const DecayFunction g = build_decay(cfg);
  const int r = nf_order_for(cfg, g);
  const PolyJet f = build_map_jet(cfg, g, jet_degree_for(cfg, r));
  const NormalFormResult nf =
      compute_normal_form(f, r, cfg.tol, g, HomologicalMethod::Direct,
                          cfg.resonance_tol);

  const double radius = cfg.sample_radius > 0.0 ? cfg.sample_radius : 0.1;
  const std::vector<LatticeVector> samples = draw_samples(
      f.window(), cfg.seed, std::min(cfg.samples, 20), radius);
  const NfResidualReport res = nf_residual(f, nf.k, nf.h, r, samples);

  json witnesses = json::array();
  for (const ResonanceWitness& w : nf.resonances.witnesses)
    witnesses.push_back(json{{"order", w.order},
                             {"target_index", w.target_index},
                             {"factor_indices", w.factor_indices},
                             {"gap", w.gap}});
  json solves = json::array();
  for (const HomologicalInfo& info : nf.solves)
    solves.push_back(homological_json(info));

  json report{{"order", r},
              {"resonant_orders", nf.resonances.resonant_orders},
              {"resonance_witnesses", witnesses},
              {"k_gamma", nf.k_gamma},
              {"h_gamma", nf.h_gamma},
              {"solves", solves},
              {"residual_order_norms", res.order_norms},
              {"residual_max", res.max_order_norm},
              {"residual_sample_norms", res.sample_norms},
              {"residual_sample_ratios", res.sample_ratios},
              {"sample_radius", radius}};

  // tensor dump with one multi-index column per slot; -1 pads unused slots
  std::string csv = "order,i";
  for (int q = 1; q <= r; ++q) csv += ",j" + std::to_string(q);
  csv += ",row,col,value\n";
  for (int k = 2; k <= r; ++k) {
    nf.k.coeff(k).for_each_block(
        [&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& b) {
          std::string prefix = std::to_string(k) + "," +
                               std::to_string(key[0]);
          for (int q = 1; q <= r; ++q)
            prefix += "," + std::to_string(
                                q < static_cast<int>(key.size())
                                    ? key[static_cast<std::size_t>(q)]
                                    : -1);
          for (int row = 0; row < b.rows(); ++row)
            for (int col = 0; col < b.cols(); ++col)
              csv += prefix + "," + std::to_string(row) + "," +
                     std::to_string(col) + "," + csv_double(b(row, col)) +
                     "\n";
        });
  }
  files.write_text("nf_k.csv", csv);

  *passed = res.max_order_norm <= cfg.nf_residual_tol;
  return report;
}

json stage_conjugacy(const ExperimentConfig& cfg, ArtifactWriter& files,
                     bool* passed) {
  const DecayFunction g = build_decay(cfg);
  const BlockLinearMap m_op = build_linear_map(cfg, g);
  const SpectralBounds b = bounds_for_mode(cfg, m_op, g);
  const SternbergConfig sel =
      select_m_delta(b.alpha, b.beta, g.amplitude(), 0, cfg.mode);
  const PolyJet f = build_map_jet(cfg, g, jet_degree_for(cfg, sel.r0));
  const PolyJet s0 = build_S0(f, sel.m, sel.r0, g, cfg.tol);

  const double radius =
      cfg.sample_radius > 0.0 ? cfg.sample_radius : sel.delta / 2.0;
  const std::vector<LatticeVector> samples =
      draw_samples(f.window(), cfg.seed, cfg.samples, radius);
  const ConjugacyReport rep = conjugacy_residual(
      f, ConjugacyTarget(m_op), s0, sel.m, samples, g, cfg.eval_tol, 500);
  const double measured =
      estimate_contraction(m_op, sel.m, sel.r0, sel.delta, g);

  int max_iterations = 0;
  for (int n : rep.iterations) max_iterations = std::max(max_iterations, n);
  json report{{"selection",
               json{{"alpha", sel.alpha},
                    {"beta", sel.beta},
                    {"nu", sel.nu},
                    {"r0", sel.r0},
                    {"m", sel.m},
                    {"delta", sel.delta},
                    {"eps1", sel.eps1},
                    {"eps2", sel.eps2},
                    {"eps3", sel.eps3},
                    {"contraction", sel.contraction},
                    {"mode", sel.mode == SternbergMode::Spectral
                                 ? "spectral"
                                 : "perturbative"}}},
              {"contraction_measured", measured},
              {"sample_radius", radius},
              {"sample_count", cfg.samples},
              {"sup_residual", rep.sup_residual},
              {"max_iterations", max_iterations},
              {"max_increment_ratio", rep.max_increment_ratio},
              {"jet_agreement", rep.jet_agreement},
              {"derivative_gamma", rep.derivative_gamma}};

  std::string csv = "sample,residual,iterations,first_increment,last_increment\n";
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    const std::vector<double>& inc = rep.increments[i];
    csv += std::to_string(i) + "," + csv_double(rep.residuals[i]) + "," +
           std::to_string(rep.iterations[i]) + "," +
           csv_double(inc.empty() ? 0.0 : inc.front()) + "," +
           csv_double(inc.empty() ? 0.0 : inc.back()) + "\n";
  }
  files.write_text("conj_samples.csv", csv);

  *passed = rep.sup_residual <= cfg.conj_residual_tol &&
            rep.max_increment_ratio < 1.0;
  return report;
}

}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Decay: return "decay";
    case Stage::Norms: return "norms";
    case Stage::Spectrum: return "spectrum";
    case Stage::NormalForm: return "nf";
    case Stage::Conjugacy: return "conj";
  }
  return "unknown";
}

std::vector<Stage> parse_stages(const std::vector<std::string>& names) {
  static constexpr Stage all[] = {Stage::Decay, Stage::Norms, Stage::Spectrum,
                                  Stage::NormalForm, Stage::Conjugacy};
  if (names.empty()) return {std::begin(all), std::end(all)};
  std::vector<Stage> out;
  for (Stage s : all) {
    if (std::find(names.begin(), names.end(), stage_name(s)) != names.end())
      out.push_back(s);
  }
  for (const std::string& name : names) {
    bool known = false;
    for (Stage s : all) known = known || name == stage_name(s);
    if (!known)
      throw SchemaError("stage: unknown name \"" + name +
                        "\" (expected decay|norms|spectrum|nf|conj)");
  }
  return out;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::vector<Stage>& stages,
                            const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  PipelineResult result;
  for (Stage stage : stages) {
    StageOutcome outcome;
    outcome.stage = stage;
    ArtifactWriter files(out_dir, result.artifacts);
    try {
      bool passed = false;
      switch (stage) {
        case Stage::Decay:
          outcome.report = stage_decay(cfg, files, &passed);
          break;
        case Stage::Norms:
          outcome.report = stage_norms(cfg, files, &passed);
          break;
        case Stage::Spectrum:
          outcome.report = stage_spectrum(cfg, files, &passed);
          break;
        case Stage::NormalForm:
          outcome.report = stage_normal_form(cfg, files, &passed);
          break;
        case Stage::Conjugacy:
          outcome.report = stage_conjugacy(cfg, files, &passed);
          break;
      }
      outcome.passed = passed;
      outcome.exit_code = passed ? 0 : 4;
    } catch (const Error& e) {
      outcome.passed = false;
      outcome.exit_code = exit_code_for(e.kind());
      outcome.report["error"] = json{{"name", e.name()},
                                     {"message", e.what()},
                                     {"exit_code", outcome.exit_code}};
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.exit_code = 1;
      outcome.report["error"] =
          json{{"name", "unexpected"}, {"message", e.what()}, {"exit_code", 1}};
    }
    outcome.report["stage"] = stage_name(stage);
    outcome.report["passed"] = outcome.passed;
    outcome.report["generated_at"] = iso_timestamp();

    const std::string file =
        std::string("report_") + stage_name(stage) + ".json";
    files.write_json(file, outcome.report);
    if (result.exit_code == 0 && outcome.exit_code != 0)
      result.exit_code = outcome.exit_code;
    result.outcomes.push_back(std::move(outcome));
  }

  json summary{{"exit_code", result.exit_code},
               {"stages", json::array()},
               {"generated_at", iso_timestamp()}};
  for (const StageOutcome& o : result.outcomes)
    summary["stages"].push_back(json{{"name", stage_name(o.stage)},
                                     {"passed", o.passed},
                                     {"exit_code", o.exit_code}});
  ArtifactWriter files(out_dir, result.artifacts);
  files.write_json("run_summary.json", summary);
  return result;
}

}  // namespace lattice
