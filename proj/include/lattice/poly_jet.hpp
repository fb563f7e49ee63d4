#pragma once

#include <vector>

#include "lattice/multi_linear_map.hpp"

namespace lattice {

// Polynomial jet at the origin: F(x) = sum_{k=1}^{r} C_k x^{tensor k} with
// symmetric coefficients and F(0) = 0 (the fixed point sits at 0; translate
// before building a jet elsewhere).  Coefficients are symmetrized on entry,
// so equality of jets is equality of blocks.
class PolyJet {
 public:
  PolyJet(const LatticeWindow& w, int degree);

  static PolyJet identity(const LatticeWindow& w, int degree);
  static PolyJet from_linear(const BlockLinearMap& a, int degree);

  const LatticeWindow& window() const { return win_; }
  int degree() const { return degree_; }

  // order k in 1..degree
  const MultiLinearMap& coeff(int k) const;
  void set_coeff(int k, const MultiLinearMap& c);
  BlockLinearMap linear_part() const { return coeff(1).to_linear(); }

 private:
  LatticeWindow win_;
  int degree_;
  std::vector<MultiLinearMap> coeffs_;
};

// Jet of g(f(x)) truncated to degree r <= min(deg g, deg f).  Coefficients
// come from expanding g's multilinearity over the graded parts of f, which
// realizes the usual derivative composition formula with exact constants.
PolyJet jet_compose(const PolyJet& g, const PolyJet& f, int r);

// Jet g with g(f(x)) = x through degree r; needs an invertible linear part.
PolyJet jet_invert(const PolyJet& f, int r);

// Jet of the m-fold iterate f^m truncated to degree r.
PolyJet jet_iterate(const PolyJet& f, int m, int r);

LatticeVector jet_eval(const PolyJet& f, const LatticeVector& x);

// Derivative Df(x) = sum_k k C_k(x,..,x,.) as a linear map; Df(0) = C_1.
BlockLinearMap jet_derivative(const PolyJet& f, const LatticeVector& x);

// Conjugation by delta*Id: order-k coefficient scales by delta^{k-1}, so the
// nonlinear part is O(delta) on the unit ball.
PolyJet rescale(const PolyJet& f, double delta);

}  // namespace lattice
