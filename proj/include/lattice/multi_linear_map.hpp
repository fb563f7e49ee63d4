#pragma once

#include <vector>

#include "lattice/block_linear_map.hpp"

namespace lattice {

// k-linear operator on the truncated lattice stored as sparse blocks keyed by
// node indices (i; j_1..j_k); an absent block is zero.  A block maps
// (R^n)^{tensor k} -> R^n and is stored as an n x n^k matrix whose columns
// enumerate slot coordinates big-endian (slot 1 varies slowest), matching the
// Kronecker product convention used by compose.
class MultiLinearMap {
 public:
  static constexpr double kDefaultPrune = BlockLinearMap::kDefaultPrune;

  // key[0] = output node i, key[1..k] = input nodes j_1..j_k.
  using Key = std::vector<int>;

  MultiLinearMap(const LatticeWindow& w, int arity);

  static MultiLinearMap zero(const LatticeWindow& w, int arity) {
    return MultiLinearMap(w, arity);
  }
  static MultiLinearMap from_linear(const BlockLinearMap& a);
  // arity 1 only.
  BlockLinearMap to_linear() const;

  const LatticeWindow& window() const { return win_; }
  int arity() const { return arity_; }
  bool symmetric_flag() const { return symmetric_; }
  // n^k, the column count of every block.
  int tensor_cols() const { return tensor_cols_; }

  void set_block(const Key& key, const Eigen::MatrixXd& b,
                 double prune_tol = kDefaultPrune);
  void add_to_block(const Key& key, const Eigen::MatrixXd& b,
                    double prune_tol = kDefaultPrune);
  // nullptr when absent.
  const Eigen::MatrixXd* block(const Key& key) const;
  std::size_t block_count() const { return blocks_.size(); }

  template <typename F>
  void for_each_block(F&& fn) const {
    for (const auto& [key, b] : blocks_) fn(key, b);
  }

  // Column index of slot coordinates (a_1..a_k), big-endian.
  int column_index(const std::vector<int>& digits) const;

  LatticeVector apply(const std::vector<LatticeVector>& vectors) const;

 private:
  friend MultiLinearMap symmetrize(const MultiLinearMap& w);
  friend double ml_op_norm(const MultiLinearMap& w);
  friend MultiLinearMap operator+(const MultiLinearMap& a,
                                  const MultiLinearMap& b);
  friend MultiLinearMap operator*(double c, const MultiLinearMap& a);

  void check_key(const Key& key) const;

  LatticeWindow win_;
  int arity_;
  int tensor_cols_;
  bool symmetric_ = false;
  std::map<Key, Eigen::MatrixXd> blocks_;
};

// Full sum rule sup_i sum_{j's} ||W_{i;j's}||: bounds ||W(v_1..v_k)||_inf by
// this times prod ||v_q||_inf (exact for n = 1).
double ml_op_norm(const MultiLinearMap& w);
// max over slots p of sup_{i,j_p} (sum over free slots of block norms) / G(i-j_p).
double ml_gamma(const MultiLinearMap& w, const DecayFunction& gamma);
// max(ml_op_norm, ml_gamma); coincides with gamma_norm for arity 1.
double ml_gamma_norm(const MultiLinearMap& w, const DecayFunction& gamma);

MultiLinearMap operator+(const MultiLinearMap& a, const MultiLinearMap& b);
MultiLinearMap operator-(const MultiLinearMap& a, const MultiLinearMap& b);
MultiLinearMap operator*(double c, const MultiLinearMap& a);

// Plugs u_t into the listed slots (0-based, distinct); result keeps the
// remaining slots in their original order.  Full contraction is apply.
MultiLinearMap contract(const MultiLinearMap& w, const std::vector<int>& slots,
                        const std::vector<LatticeVector>& vectors);

// Average over slot permutations; result compares equal under any
// permutation of its input vectors.
MultiLinearMap symmetrize(const MultiLinearMap& w);

// A(B_1(..), ..., B_k(..)): arity of the result is the sum of the B arities.
MultiLinearMap compose_multi(const MultiLinearMap& a,
                             const std::vector<MultiLinearMap>& bs,
                             double prune_tol = MultiLinearMap::kDefaultPrune);

// Flattening to an (n s) x (n s)^k matrix; slot scalar indices j*n + a are
// enumerated big-endian, consistent with the per-block column layout.
Eigen::MatrixXd ml_to_dense(const MultiLinearMap& w);
MultiLinearMap ml_from_dense(const LatticeWindow& w, int arity,
                             const Eigen::MatrixXd& dense,
                             double prune_tol = MultiLinearMap::kDefaultPrune);

}  // namespace lattice
