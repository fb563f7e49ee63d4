#include "lattice/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "lattice/errors.hpp"

namespace lattice {

namespace {

using nlohmann::json;

// Collects schema violations so one load reports every problem at once.
struct SchemaCheck {
  std::vector<std::string> errors;

  void fail(const std::string& what) { errors.push_back(what); }

  const json* object(const json& j, const char* key, bool required) {
    if (!j.contains(key)) {
      if (required) fail(std::string(key) + ": missing section");
      return nullptr;
    }
    if (!j.at(key).is_object()) {
      fail(std::string(key) + ": expected an object");
      return nullptr;
    }
    return &j.at(key);
  }

  double number(const json& j, const std::string& key, double fallback,
                bool required) {
    if (!j.contains(key)) {
      if (required) fail(key + ": missing");
      return fallback;
    }
    if (!j.at(key).is_number()) {
      fail(key + ": expected a number");
      return fallback;
    }
    return j.at(key).get<double>();
  }

  int integer(const json& j, const std::string& key, int fallback,
              bool required) {
    if (!j.contains(key)) {
      if (required) fail(key + ": missing");
      return fallback;
    }
    if (!j.at(key).is_number_integer()) {
      fail(key + ": expected an integer");
      return fallback;
    }
    return j.at(key).get<int>();
  }

  std::string text(const json& j, const std::string& key,
                   const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) {
      fail(key + ": expected a string");
      return fallback;
    }
    return j.at(key).get<std::string>();
  }

  bool positive(double v, const std::string& key) {
    if (!(v > 0.0)) {
      fail(key + ": must be positive");
      return false;
    }
    return true;
  }

  // rows x cols matrix given as an array of row arrays
  Eigen::MatrixXd matrix(const json& j, const std::string& key, int rows,
                         int cols) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    if (!j.contains(key) || !j.at(key).is_array() ||
        static_cast<int>(j.at(key).size()) != rows) {
      fail(key + ": expected " + std::to_string(rows) + " rows");
      return out;
    }
    for (int r = 0; r < rows; ++r) {
      const json& row = j.at(key).at(r);
      if (!row.is_array() || static_cast<int>(row.size()) != cols) {
        fail(key + ": row " + std::to_string(r) + " must have " +
             std::to_string(cols) + " entries");
        return out;
      }
      for (int c = 0; c < cols; ++c) {
        if (!row.at(c).is_number()) {
          fail(key + ": entry (" + std::to_string(r) + "," +
               std::to_string(c) + ") must be a number");
          return out;
        }
        out(r, c) = row.at(c).get<double>();
      }
    }
    return out;
  }

  CouplingSpec coupling(const json& parent, const std::string& prefix) {
    CouplingSpec spec;
    if (!parent.contains("coupling")) return spec;
    const json& j = parent.at("coupling");
    if (!j.is_object()) {
      fail(prefix + ".coupling: expected an object");
      return spec;
    }
    spec.present = true;
    spec.strength = number(j, prefix + ".coupling.strength", 0.0, true);
    if (spec.strength < 0.0) fail(prefix + ".coupling.strength: negative");
    spec.profile = text(j, prefix + ".coupling.profile", "gamma");
    if (spec.profile != "gamma")
      fail(prefix + ".coupling.profile: unresolvable profile \"" +
           spec.profile + "\" (only \"gamma\" is defined)");
    return spec;
  }
};

ExperimentConfig parse_json(const json& root) {
  if (!root.is_object())
    throw SchemaError("config: top level must be a JSON object");
  ExperimentConfig cfg;
  SchemaCheck check;

  if (const json* decay = check.object(root, "decay", true)) {
    cfg.alpha = check.number(*decay, "decay.alpha", 0.0, true);
    cfg.theta = check.number(*decay, "decay.theta", 0.0, true);
    if (cfg.theta < 0.0) check.fail("decay.theta: negative");
    cfg.decay_dim = check.integer(*decay, "decay.dim", 1, true);
    if (cfg.decay_dim < 1 || cfg.decay_dim > 4)
      check.fail("decay.dim: must lie in 1..4");
    cfg.decay_window_l = check.integer(*decay, "decay.window_l", 40, false);
    if (cfg.decay_window_l < 1) check.fail("decay.window_l: must be >= 1");
    if (cfg.alpha <= cfg.decay_dim)
      check.fail("decay.alpha: must exceed decay.dim for summability");
    const std::string norm =
        check.text(*decay, "decay.index_norm", "euclidean");
    if (norm == "euclidean")
      cfg.index_norm = IndexNorm::Euclidean;
    else if (norm == "sup")
      cfg.index_norm = IndexNorm::Sup;
    else
      check.fail("decay.index_norm: expected \"euclidean\" or \"sup\"");
    if (decay->contains("amplitude") && decay->at("amplitude").is_number()) {
      cfg.amplitude_largest = false;
      cfg.amplitude = decay->at("amplitude").get<double>();
      check.positive(cfg.amplitude, "decay.amplitude");
    } else if (check.text(*decay, "decay.amplitude", "largest") != "largest") {
      check.fail("decay.amplitude: expected \"largest\" or a positive number");
    }
  }

  if (const json* window = check.object(root, "window", true)) {
    cfg.dim = check.integer(*window, "window.dim", 1, true);
    cfg.radius = check.integer(*window, "window.radius", 0, true);
    cfg.node_dim = check.integer(*window, "window.node_dim", 1, true);
    if (cfg.dim < 1 || cfg.dim > 4) check.fail("window.dim: must lie in 1..4");
    if (cfg.radius < 0) check.fail("window.radius: negative");
    if (cfg.node_dim < 1) check.fail("window.node_dim: must be >= 1");
    if (cfg.dim != cfg.decay_dim)
      check.fail("window.dim: must match decay.dim");
  }

  const int n = std::max(cfg.node_dim, 1);
  if (const json* map = check.object(root, "map", true)) {
    if (const json* linear = check.object(*map, "linear", true)) {
      cfg.node_matrix = check.matrix(*linear, "map.linear.node_matrix", n, n);
      cfg.linear_coupling = check.coupling(*linear, "map.linear");
    }
    if (map->contains("polynomial")) {
      if (!map->at("polynomial").is_array()) {
        check.fail("map.polynomial: expected an array");
      } else {
        int t = 0;
        for (const json& term : map->at("polynomial")) {
          const std::string prefix =
              "map.polynomial[" + std::to_string(t++) + "]";
          if (!term.is_object()) {
            check.fail(prefix + ": expected an object");
            continue;
          }
          PolyTermSpec spec;
          spec.order = check.integer(term, prefix + ".order", 2, true);
          if (spec.order < 2) {
            check.fail(prefix + ".order: must be >= 2");
            spec.order = 2;
          }
          if (term.contains("node_coeffs")) {
            spec.has_node_coeffs = true;
            spec.node_coeffs =
                check.matrix(term, prefix + ".node_coeffs", n,
                             static_cast<int>(std::pow(n, spec.order)));
          }
          spec.coupling = check.coupling(term, prefix);
          if (!spec.has_node_coeffs && !spec.coupling.present)
            check.fail(prefix + ": needs node_coeffs or coupling");
          cfg.polynomial.push_back(std::move(spec));
        }
      }
    }
  }

  if (const json* run = check.object(root, "run", true)) {
    const std::string mode = check.text(*run, "run.mode", "perturbative");
    if (mode == "perturbative")
      cfg.mode = SternbergMode::Perturbative;
    else if (mode == "spectral")
      cfg.mode = SternbergMode::Spectral;
    else
      check.fail("run.mode: expected \"perturbative\" or \"spectral\"");
    cfg.r = check.integer(*run, "run.r", 0, false);
    if (cfg.r != 0 && cfg.r < 2) check.fail("run.r: must be 0 or >= 2");
    cfg.tol = check.number(*run, "run.tol", 1e-10, false);
    check.positive(cfg.tol, "run.tol");
    cfg.resonance_tol = check.number(*run, "run.resonance_tol", 1e-8, false);
    check.positive(cfg.resonance_tol, "run.resonance_tol");
    cfg.nf_residual_tol =
        check.number(*run, "run.nf_residual_tol", 1e-8, false);
    check.positive(cfg.nf_residual_tol, "run.nf_residual_tol");
    cfg.conj_residual_tol =
        check.number(*run, "run.conj_residual_tol", 1e-6, false);
    check.positive(cfg.conj_residual_tol, "run.conj_residual_tol");
    cfg.eval_tol = check.number(*run, "run.eval_tol", 1e-10, false);
    check.positive(cfg.eval_tol, "run.eval_tol");
    cfg.samples = check.integer(*run, "run.samples", 100, false);
    if (cfg.samples < 1) check.fail("run.samples: must be >= 1");
    const int seed = check.integer(*run, "run.seed", 1, true);
    if (seed < 0) check.fail("run.seed: negative");
    cfg.seed = static_cast<std::uint64_t>(std::max(seed, 0));
    cfg.sample_radius = check.number(*run, "run.sample_radius", 0.0, false);
    if (cfg.sample_radius < 0.0) check.fail("run.sample_radius: negative");
  }

  if (!check.errors.empty()) {
    std::ostringstream msg;
    msg << "config schema: " << check.errors.size() << " violation(s)";
    for (const std::string& e : check.errors) msg << "; " << e;
    throw SchemaError(msg.str());
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_json(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

DecayFunction build_decay(const ExperimentConfig& cfg) {
  if (cfg.amplitude_largest)
    return make_power_exp_decay(cfg.alpha, cfg.theta, cfg.decay_dim,
                                cfg.decay_window_l, cfg.index_norm);
  DecayFunction g(cfg.decay_dim, cfg.alpha, cfg.theta, cfg.amplitude,
                  cfg.index_norm);
  g.attach_certificate(verify_decay(g, cfg.decay_window_l));
  return g;
}

namespace {

// Fixed phase patterns in the centered offsets; block entries get a small
// extra phase per component so n > 1 blocks are not rank one.
double linear_phase(int i, int j, int c, int p, int q, int n) {
  return std::sin(1.0 + 0.3 * (i - c) + 0.7 * (j - c) + 0.05 * (p * n + q));
}

double poly_phase(int i, const std::vector<int>& js, int c, int p, int col,
                  int order, int n) {
  double arg = 0.4 * (i - c);
  for (int q = 0; q < order; ++q) {
    const double w = (q % 2 == 0 ? -1.0 : 1.0) * (0.2 + 0.4 * q);
    arg += w * (js[static_cast<std::size_t>(q)] - c);
  }
  const double npow = std::pow(n, order);
  return std::cos(arg + 0.05 * (p * npow + col));
}

}  // namespace

BlockLinearMap build_linear_map(const ExperimentConfig& cfg,
                                const DecayFunction& gamma,
                                int radius_override) {
  const int radius = radius_override > 0 ? radius_override : cfg.radius;
  LatticeWindow w(cfg.dim, radius, cfg.node_dim);
  BlockLinearMap out(w);
  const int n = cfg.node_dim;
  const int c = w.node_count() / 2;
  for (int i = 0; i < w.node_count(); ++i) {
    out.set_block(i, i, cfg.node_matrix, 0.0);
    if (!cfg.linear_coupling.present) continue;
    for (int j = 0; j < w.node_count(); ++j) {
      if (j == i) continue;
      const double envelope =
          cfg.linear_coupling.strength * gamma(w.diff(i, j));
      Eigen::MatrixXd b(n, n);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          b(p, q) = envelope * linear_phase(i, j, c, p, q, n);
      out.add_to_block(i, j, b, 0.0);
    }
  }
  return out;
}

PolyJet build_map_jet(const ExperimentConfig& cfg, const DecayFunction& gamma,
                      int degree, int radius_override) {
  const int radius = radius_override > 0 ? radius_override : cfg.radius;
  const BlockLinearMap a = build_linear_map(cfg, gamma, radius);
  const LatticeWindow& w = a.window();
  PolyJet f(w, degree);
  f.set_coeff(1, MultiLinearMap::from_linear(a));
  const int n = cfg.node_dim;
  const int c = w.node_count() / 2;
  std::map<int, MultiLinearMap> by_order;
  for (const PolyTermSpec& term : cfg.polynomial) {
    if (term.order > degree) continue;
    MultiLinearMap ml(w, term.order);
    const int cols = static_cast<int>(std::pow(n, term.order));
    if (term.has_node_coeffs) {
      MultiLinearMap::Key key;
      key.assign(static_cast<std::size_t>(term.order) + 1, 0);
      for (int i = 0; i < w.node_count(); ++i) {
        std::fill(key.begin(), key.end(), i);
        ml.set_block(key, term.node_coeffs, 0.0);
      }
    }
    if (term.coupling.present) {
      MultiLinearMap::Key key;
      key.assign(static_cast<std::size_t>(term.order) + 1, 0);
      std::vector<int> js(static_cast<std::size_t>(term.order), 0);
      // odometer over all input node tuples
      while (true) {
        for (int i = 0; i < w.node_count(); ++i) {
          double envelope = term.coupling.strength;
          for (int q = 0; q < term.order; ++q)
            envelope *= gamma(w.diff(i, js[static_cast<std::size_t>(q)]));
          key[0] = i;
          for (int q = 0; q < term.order; ++q)
            key[static_cast<std::size_t>(q) + 1] =
                js[static_cast<std::size_t>(q)];
          Eigen::MatrixXd b(n, cols);
          for (int p = 0; p < n; ++p)
            for (int col = 0; col < cols; ++col)
              b(p, col) = envelope * poly_phase(i, js, c, p, col,
                                                term.order, n);
          ml.add_to_block(key, b, 0.0);
        }
        int slot = term.order - 1;
        while (slot >= 0 &&
               ++js[static_cast<std::size_t>(slot)] == w.node_count())
          js[static_cast<std::size_t>(slot--)] = 0;
        if (slot < 0) break;
      }
    }
    auto [it, inserted] = by_order.emplace(term.order, ml);
    if (!inserted) it->second = it->second + ml;
  }
  for (const auto& [order, ml] : by_order) f.set_coeff(order, ml);
  return f;
}

}  // namespace lattice
