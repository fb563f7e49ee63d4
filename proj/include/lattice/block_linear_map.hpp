#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "lattice/decay.hpp"
#include "lattice/lattice_vector.hpp"
#include "lattice/window.hpp"

namespace lattice {

// Induced sup-norm of a block: max absolute row sum.  This is the node
// operator norm for the sup pairing on R^n (our default ambient norm).
double block_norm(const Eigen::MatrixXd& b);

// Linear operator on the truncated lattice stored as a sparse collection of
// n x n blocks A_ij; an absent block is zero.  Iteration order over blocks is
// deterministic (ascending (i,j)), which keeps every accumulated norm and
// report reproducible.
class BlockLinearMap {
 public:
  static constexpr double kDefaultPrune = 1e-16;

  explicit BlockLinearMap(const LatticeWindow& w) : win_(w) {}

  static BlockLinearMap zero(const LatticeWindow& w) { return BlockLinearMap(w); }
  static BlockLinearMap identity(const LatticeWindow& w);
  // A_ij = a * delta_ij: the uncoupled operator with node block a.
  static BlockLinearMap uncoupled(const LatticeWindow& w,
                                  const Eigen::MatrixXd& a);

  const LatticeWindow& window() const { return win_; }

  // Stores a block; blocks with norm <= prune_tol are dropped (absent = 0).
  void set_block(int i, int j, const Eigen::MatrixXd& b,
                 double prune_tol = kDefaultPrune);
  void add_to_block(int i, int j, const Eigen::MatrixXd& b,
                    double prune_tol = kDefaultPrune);
  // nullptr when the block is absent.
  const Eigen::MatrixXd* block(int i, int j) const;
  std::size_t block_count() const { return blocks_.size(); }

  template <typename F>
  void for_each_block(F&& fn) const {
    for (const auto& [key, b] : blocks_)
      fn(static_cast<int>(key / win_.node_count()),
         static_cast<int>(key % win_.node_count()), b);
  }

  LatticeVector apply(const LatticeVector& x) const;

  Eigen::MatrixXd to_dense() const;
  static BlockLinearMap from_dense(const LatticeWindow& w,
                                   const Eigen::MatrixXd& dense,
                                   double prune_tol = kDefaultPrune);

  friend double op_norm(const BlockLinearMap& a);

 private:
  LatticeWindow win_;
  std::map<long long, Eigen::MatrixXd> blocks_;
  mutable std::optional<double> op_norm_cache_;
};

// sup_i sum_j ||A_ij||: the exact lattice operator norm for n = 1 and an
// upper bound otherwise (the mode every caller of this artifact records).
double op_norm(const BlockLinearMap& a);
// gamma(A) = sup_ij ||A_ij|| / G(i-j).
double gamma_value(const BlockLinearMap& a, const DecayFunction& gamma);
// ||A||_G = max(op_norm, gamma); note ||Id||_G = G(0)^-1, not 1.
double gamma_norm(const BlockLinearMap& a, const DecayFunction& gamma);

BlockLinearMap operator+(const BlockLinearMap& a, const BlockLinearMap& b);
BlockLinearMap operator-(const BlockLinearMap& a, const BlockLinearMap& b);
BlockLinearMap operator*(double c, const BlockLinearMap& a);

// Block product sum_k A_ik B_kj with zero padding outside the window.
// prune_tol = 0 keeps every nonzero product block; gamma norms divide by
// G(i-j), so far blocks stay meaningful long after they drop below 1e-16.
BlockLinearMap compose_linear(const BlockLinearMap& a, const BlockLinearMap& b,
                              double prune_tol = BlockLinearMap::kDefaultPrune);

// Truncated Neumann series for (M0 + M1)^-1 given M0^-1; requires
// q = ||M0^-1||_G ||M1||_G < 1 and guarantees residual norm <= tol/(1-q).
BlockLinearMap neumann_invert(const BlockLinearMap& m0_inverse,
                              const BlockLinearMap& m1,
                              const DecayFunction& gamma, double tol,
                              int max_terms);

// Dense LU inverse with a residual check; NotInvertible when the truncated
// operator is (numerically) singular.
BlockLinearMap invert_linear(const BlockLinearMap& a);

}  // namespace lattice
