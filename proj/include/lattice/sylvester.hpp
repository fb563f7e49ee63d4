#pragma once

#include <complex>
#include <string>
#include <vector>

#include "lattice/multi_linear_map.hpp"

namespace lattice {

// W -> B W(A., ..., A.) acting on k-linear maps.
struct SylvesterOperator {
  BlockLinearMap left;   // B, applied to the output
  BlockLinearMap right;  // A, applied in every slot
  int arity_k;

  SylvesterOperator(const BlockLinearMap& b, const BlockLinearMap& a, int k)
      : left(b), right(a), arity_k(k) {
    if (k < 1) throw PreconditionViolated("SylvesterOperator: arity must be >= 1");
    require_same_window(b.window(), a.window(), "SylvesterOperator");
  }
};

MultiLinearMap sylvester_apply(const SylvesterOperator& op,
                               const MultiLinearMap& w);

struct ResonanceWitness {
  int order;
  // target eigenvalue index and the factor indices whose product matches it
  int target_index;
  std::vector<int> factor_indices;
  double gap;
};

// Orders j in [2, max_order] where some eigenvalue equals a j-fold product
// of eigenvalues within tol.
struct ResonanceSet {
  int max_order = 0;
  double tol = 0.0;
  std::vector<int> resonant_orders;
  std::vector<ResonanceWitness> witnesses;

  bool is_resonant(int order) const;
};

// Requires every eigenvalue in the open punctured unit disc (a linearization
// of a contraction with invertible linear part); NotContraction otherwise.
ResonanceSet detect_resonances(const std::vector<std::complex<double>>& spectrum,
                               int max_order, double tol = 1e-8);

enum class HomologicalMethod { Direct, Neumann };

struct HomologicalInfo {
  std::string method;
  // max/min modulus over the divisor spectrum of S - id (direct only)
  double condition = 0.0;
  // sup block norm of (S - id)K - rhs, measured through sylvester_apply
  double residual = 0.0;
  int iterations = 0;
  // operator norm contraction estimate (neumann only)
  double contraction = 0.0;
};

// Solves (S - id)K = rhs for S(W) = A^{-1} W(A., ..., A.) at the arity of
// rhs.  Direct: diagonalize A and divide entrywise in the eigenbasis, with a
// dense vectorized solve as fallback for ill-conditioned eigenbases.
// Neumann: iterate K <- S(K) - rhs while the operator norm estimate of S is
// below one.  Unknown counts above 2e4 are rejected.
MultiLinearMap solve_homological(const BlockLinearMap& a,
                                 const MultiLinearMap& rhs,
                                 HomologicalMethod method, double tol,
                                 HomologicalInfo* info = nullptr,
                                 double resonance_tol = 1e-8);

}  // namespace lattice
