#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lattice/window.hpp"

namespace lattice {

// Any radially evaluable profile on Z^m; used for verification of
// user-supplied tables as well as the built-in power-exponential family.
using ProfileFn = std::function<double(const MultiIndex&)>;

// Outcome of checking the two decay-function properties on a finite window:
//   (1) sum over the window plus a tail bound stays <= 1,
//   (2) sum_k G(i-k)G(k-j) <= G(i-j) for all window pairs (i,j).
// For m = 1 the convolution check scans all pairs exactly; for m >= 2 it uses
// a per-difference certificate that upper-bounds every pair sum, so a pass is
// sound either way.  worst_* identify the tightest pair found.
struct DecayReport {
  int dim_m = 0;
  int window_L = 0;
  double window_sum = 0.0;
  double tail_bound = 0.0;
  double sum_margin = 0.0;  // 1 - window_sum - tail_bound
  bool sum_ok = false;
  double conv_margin = 0.0;  // min over pairs (or differences) of rhs - lhs
  bool conv_ok = false;
  std::string conv_mode;  // "exact_pairs" or "difference_certificate"
  MultiIndex worst_i, worst_j;
  double worst_lhs = 0.0;  // windowed convolution sum at the worst pair
  double worst_rhs = 0.0;  // profile value at the worst difference
  bool passed() const { return sum_ok && conv_ok; }
};

// Power-exponential profile G(0) = a, G(j) = a |j|^-alpha e^(-theta |j|).
// Instances built through make_power_exp_decay carry a verification
// certificate for the window they were constructed on.
class DecayFunction {
 public:
  DecayFunction(int dim_m, double alpha, double theta, double amplitude,
                IndexNorm norm = IndexNorm::Euclidean);

  double operator()(const MultiIndex& j) const;
  // Convenience for m = 1.
  double operator()(int j) const;
  // Profile value at radius r > 0 (independent of direction).
  double at_radius(double r) const;

  int dim() const { return dim_m_; }
  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  double amplitude() const { return amplitude_; }
  IndexNorm index_norm() const { return norm_; }

  const std::optional<DecayReport>& certificate() const { return certificate_; }
  void attach_certificate(DecayReport r) { certificate_ = std::move(r); }

  ProfileFn as_profile() const;

 private:
  int dim_m_;
  double alpha_;
  double theta_;
  double amplitude_;
  IndexNorm norm_;
  std::optional<DecayReport> certificate_;
};

// Largest amplitude on a geometric grid refined by bisection such that both
// decay properties hold on {-L..L}^m, with the summability margin charged for
// the off-window tail.  Throws NotSummable for a non-summable profile and
// NoValidAmplitude if the search collapses.
DecayFunction make_power_exp_decay(double alpha, double theta, int dim_m,
                                   int window_L,
                                   IndexNorm norm = IndexNorm::Euclidean);

// Checks the two properties for an arbitrary profile.  tail_bound is added to
// the window sum in property (1); pass 0 when only on-window behaviour is of
// interest.
DecayReport verify_decay(const ProfileFn& profile, int dim_m, int window_L,
                         double tail_bound = 0.0);
// Same, with the tail bound of the power-exponential family filled in.
DecayReport verify_decay(const DecayFunction& gamma, int window_L);

// Upper bound on sum_{|k|_sup > L} G(k) by explicit shell sums plus an
// integral comparison; monotone non-increasing in L on the fixture families.
double decay_tail(const DecayFunction& gamma, int L);

}  // namespace lattice
