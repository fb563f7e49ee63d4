#pragma once

#include <vector>

#include "lattice/poly_jet.hpp"
#include "lattice/sylvester.hpp"

namespace lattice {

// Polynomial conjugation data at an attracting fixed point: F compose K and
// K compose H agree through order r, and H keeps only the linear part plus
// the resonant orders.
struct NormalFormResult {
  PolyJet k;  // K_1 = Id
  PolyJet h;  // H_1 = linear part of F; higher orders only at resonances
  ResonanceSet resonances;
  PolyJet residual_jet;  // F compose K minus K compose H through order r
  std::vector<double> k_gamma;  // ml_gamma of K_k, entry k-1 for k = 1..r
  std::vector<double> h_gamma;
  std::vector<HomologicalInfo> solves;  // one per non-resonant order
};

// Order-by-order solve of F(K(x)) = K(H(x)) + o(|x|^r) with K_1 = Id and
// H_1 = A.  Non-resonant orders put everything into K; resonant orders keep
// the obstruction in H and set K_k = 0.  Residual coefficients are checked
// against tol, and gamma is used only for the reported decay tables.
NormalFormResult compute_normal_form(
    const PolyJet& f, int r, double tol, const DecayFunction& gamma,
    HomologicalMethod method = HomologicalMethod::Direct,
    double resonance_tol = 1e-8);

struct NfResidualReport {
  // ml_op_norm of the order-k coefficient of F compose K - K compose H
  std::vector<double> order_norms;
  double max_order_norm = 0.0;
  // per sample: |F(K(x)) - K(H(x))|_inf and the same over |x|_inf^r
  std::vector<double> sample_norms;
  std::vector<double> sample_ratios;
};

// Validates a conjugation pair without trusting how it was produced.
NfResidualReport nf_residual(const PolyJet& f, const PolyJet& k,
                             const PolyJet& h, int r,
                             const std::vector<LatticeVector>& samples);

}  // namespace lattice
