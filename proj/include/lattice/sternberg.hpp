#pragma once

#include <variant>
#include <vector>

#include "lattice/normal_form.hpp"
#include "lattice/spectrum.hpp"

namespace lattice {

// Perturbative reads alpha/beta off the node spectrum of the linear part;
// spectral reads them off Gelfand radius estimates of the full operator.
enum class SternbergMode { Perturbative, Spectral };

struct SternbergConfig {
  double alpha = 0.0;  // min modulus
  double beta = 0.0;   // max modulus
  double nu = 0.0;     // log(alpha) / log(beta)
  int r0 = 0;
  int m = 0;
  double delta = 0.0;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  // a priori factor G(0)^-1 (1/a+e1)^m [(G(0)^-1 (b+e1)^m + d)((b+e1)^m + d)^{r0-1} + d]
  double contraction = 0.0;
  SternbergMode mode = SternbergMode::Perturbative;
};

// Smallest m with G(0)^-2 (beta^r0 / alpha)^m < 1, epsilons halved together
// from 0.1 until
//   G(0)^-1 (1/alpha+e1)^m [G(0)^-1 ((beta+e1)^m+e2)^r0 + e3] < 1,
// then delta halved from 1 until the a priori contraction factor drops below
// one.  r0_override = 0 derives r0 = floor(nu) + 1.
SternbergConfig select_m_delta(double alpha, double beta, double gamma0,
                               int r0_override = 0,
                               SternbergMode mode = SternbergMode::Perturbative);

// Measured counterpart of the a priori factor for an actual linear part:
// |M^-m|_G [(|M^m|_G + delta)(|M^m| + delta)^{r0-1} + delta].
double estimate_contraction(const BlockLinearMap& m_op, int m, int r0,
                            double delta, const DecayFunction& gamma);

struct SpectralBounds {
  double alpha = 0.0;
  double beta = 0.0;
};

// min/max eigenvalue modulus of the dense truncation.
SpectralBounds node_spectrum_bounds(const BlockLinearMap& a);
// beta = Gelfand radius of A, alpha = 1 / Gelfand radius of A^-1.
SpectralBounds gelfand_spectrum_bounds(const BlockLinearMap& a,
                                       const DecayFunction& gamma, int n_max);

// Inverse of the normal form transform of the m-fold iterate, the starting
// jet of the conjugation iteration.  The degree-r0 transform of F^m equals
// the one of F when both are non-resonant, so this S0 serves the m-step and
// the single-step equations alike.  Throws ResonantOrder when any order in
// 2..r0 resonates.
PolyJet build_S0(const PolyJet& f, int m, int r0, const DecayFunction& gamma,
                 double tol = 1e-10,
                 HomologicalMethod method = HomologicalMethod::Direct);

// Conjugation target: the linear part M, or a polynomial normal form H for
// the resonant case.
using ConjugacyTarget = std::variant<BlockLinearMap, PolyJet>;

// x with |H(x) - y|_inf <= tol; Newton iteration from the linearized guess
// DH(0)^-1 y.
LatticeVector newton_invert_poly(const PolyJet& h, const LatticeVector& y,
                                 double tol = 1e-12, int max_iter = 50);

// target^{-mn} S0(F^{mn} x): one fixed iterate of the conjugation sequence.
LatticeVector conjugacy_iterate(const PolyJet& f, const ConjugacyTarget& target,
                                const PolyJet& s0, int m, int n,
                                const LatticeVector& x);

struct ConjugacyEvalTrace {
  LatticeVector value;
  // number of evaluated updates; increments[t-1] = |S_t - S_{t-1}|_inf
  int iterations = 0;
  std::vector<double> increments;
};

// Runs S_t = target^{-mt} S0(F^{mt} x) until the increment drops below tol
// and returns the latest iterate.  Throws DomainEscape when an orbit point
// leaves the unit ball and NoConvergence past n_max updates.
ConjugacyEvalTrace conjugacy_eval_traced(const PolyJet& f,
                                         const ConjugacyTarget& target,
                                         const PolyJet& s0, int m,
                                         const LatticeVector& x, double tol,
                                         int n_max);
LatticeVector conjugacy_eval(const PolyJet& f, const ConjugacyTarget& target,
                             const PolyJet& s0, int m, const LatticeVector& x,
                             double tol, int n_max);

// target^{-m} S0(F^m) - S0 at jet level; zero through order s0.degree()
// certifies that the iteration cannot move the low-order jet.
PolyJet conjugacy_defect_jet(const PolyJet& f, const ConjugacyTarget& target,
                             const PolyJet& s0, int m);

struct ConjugacyReport {
  double sup_residual = 0.0;
  std::vector<double> residuals;  // |R(F(x)) - target(R(x))|_inf per sample
  std::vector<int> iterations;
  std::vector<std::vector<double>> increments;
  // worst consecutive increment ratio over pairs above the noise floor
  double max_increment_ratio = 0.0;
  // ml_op_norm per order 1..r0 of the defect jet
  std::vector<double> jet_agreement;
  // gamma value of k! C_k(S0) for k = 2..r0
  std::vector<double> derivative_gamma;
};

ConjugacyReport conjugacy_residual(const PolyJet& f,
                                   const ConjugacyTarget& target,
                                   const PolyJet& s0, int m,
                                   const std::vector<LatticeVector>& samples,
                                   const DecayFunction& gamma,
                                   double tol = 1e-10, int n_max = 200);

}  // namespace lattice
