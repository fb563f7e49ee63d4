#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lattice/decay.hpp"
#include "lattice/poly_jet.hpp"
#include "lattice/sternberg.hpp"

namespace lattice {

// Coupling band: off-diagonal blocks scaled by strength times the resolved
// profile of the node difference.  "gamma" is the only resolvable profile
// and refers to the decay section of the same config.
struct CouplingSpec {
  bool present = false;
  double strength = 0.0;
  std::string profile = "gamma";
};

struct PolyTermSpec {
  int order = 2;
  // node-local block applied identically at every node, n x n^order
  bool has_node_coeffs = false;
  Eigen::MatrixXd node_coeffs;
  CouplingSpec coupling;
};

struct ExperimentConfig {
  // decay profile
  double alpha = 2.0;
  double theta = 1.0;
  int decay_dim = 1;
  int decay_window_l = 40;
  IndexNorm index_norm = IndexNorm::Euclidean;
  bool amplitude_largest = true;  // otherwise the explicit value below
  double amplitude = 0.0;

  // truncated lattice
  int dim = 1;
  int radius = 4;
  int node_dim = 1;

  // map definition
  Eigen::MatrixXd node_matrix;
  CouplingSpec linear_coupling;
  std::vector<PolyTermSpec> polynomial;

  // run parameters
  SternbergMode mode = SternbergMode::Perturbative;
  int r = 0;  // jet order for the normal form stage; 0 derives r0
  double tol = 1e-10;
  double resonance_tol = 1e-8;
  double nf_residual_tol = 1e-8;
  double conj_residual_tol = 1e-6;
  double eval_tol = 1e-10;
  int samples = 100;
  std::uint64_t seed = 1;
  double sample_radius = 0.0;  // 0 picks delta/2 from the m/delta selection
};

// Parses and schema-validates; every violation is collected and reported in
// one aggregated SchemaError.  Malformed JSON raises ParseError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

DecayFunction build_decay(const ExperimentConfig& cfg);

// Deterministic map construction: couplings use fixed sine/cosine phase
// patterns in the centered node offsets, so identical configs build
// identical operators without an RNG.  radius_override > 0 rebuilds the same
// definition on a wider or narrower window (stability studies).
BlockLinearMap build_linear_map(const ExperimentConfig& cfg,
                                const DecayFunction& gamma,
                                int radius_override = 0);
PolyJet build_map_jet(const ExperimentConfig& cfg, const DecayFunction& gamma,
                      int degree, int radius_override = 0);

}  // namespace lattice
