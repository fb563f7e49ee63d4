#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "lattice/block_linear_map.hpp"

namespace lattice {

// Norm sequence ||A^N||_G^{1/N} along repeated squaring, recorded with its
// running infimum (the limit object is that infimum).
struct GelfandSequence {
  std::vector<int> powers;
  std::vector<double> values;
  std::vector<double> running_inf;
  // final running infimum
  double estimate = 0.0;
};

// Classification of a sample grid: a point is a resolvent candidate when the
// resolvent gamma norm stays at or below the threshold for every window
// radius in the list; otherwise (growth or singularity) it is a spectrum
// candidate.  Finite truncation can only see matrix spectra; the gamma
// structure enters through the norm level sets and their window stability.
struct SpectralReport {
  struct Point {
    std::complex<double> lambda;
    // per window radius; +inf marks a singular solve
    std::vector<double> norms;
    bool singular = false;
    bool resolvent_candidate = false;
  };

  std::vector<int> window_radii;
  double threshold = 0.0;
  std::vector<Point> grid;

  // eigenvalues of the densified operator at the largest window
  std::vector<std::complex<double>> truncated_spectrum;
  // true when the grid point nearest to each eigenvalue is a spectrum
  // candidate, witnessing that matrix spectra sit inside the flagged set
  bool truncated_spectrum_covered = true;

  GelfandSequence gelfand;
};

// Gamma norm of (A - lambda)^{-1} via a dense complexified solve.
// Throws Singular when the condition estimate exceeds 1e14.
double resolvent_gamma_norm(const BlockLinearMap& a,
                            std::complex<double> lambda,
                            const DecayFunction& gamma);

// Probes the family over the grid; `family` builds the operator at a given
// window radius so growth across windows is observable.
SpectralReport gamma_spectrum_probe(
    const std::function<BlockLinearMap(int)>& family,
    const DecayFunction& gamma, const std::vector<std::complex<double>>& grid,
    double threshold, const std::vector<int>& window_radii);

GelfandSequence gelfand_sequence(const BlockLinearMap& a,
                                 const DecayFunction& gamma, int n_max);
// Convenience: the final estimate of gelfand_sequence.
double gelfand_radius(const BlockLinearMap& a, const DecayFunction& gamma,
                      int n_max);

// Riesz projection for the circle |z - center| = radius by trapezoid
// quadrature with node doubling until the gamma norm increment drops below
// 1e-10; the result is checked against ||P^2-P||_G <= 1e-8 and
// ||AP-PA||_G <= 1e-8.  The contour must clear the truncated spectrum by
// 1e-3 * radius.
BlockLinearMap spectral_projection(const BlockLinearMap& a,
                                   const DecayFunction& gamma,
                                   std::complex<double> center, double radius,
                                   int quad_points = 16, int max_doublings = 16);

// Closed-form inverse of the banded Toeplitz operator sum_t a_t S^t via the
// linear difference recursion b_0 = 1/a_0, sum_t a_t b_{d-t} = 0 for d >= 1;
// exact on the window because the operator is triangular.  Built by the
// recursion (not a dense solve) so far coefficients keep relative accuracy,
// which gamma measurements against tiny G(d) require.
BlockLinearMap band_matrix_inverse(const std::vector<double>& coeffs,
                                   const LatticeWindow& w);

}  // namespace lattice
