#pragma once

#include <Eigen/Dense>

#include "lattice/window.hpp"

namespace lattice {

// State vector over a truncated lattice: one R^n value per node, stored
// contiguously in flat node order.  The ambient norm is the sup over nodes
// of the node sup-norm.
class LatticeVector {
 public:
  explicit LatticeVector(const LatticeWindow& w)
      : win_(w), v_(Eigen::VectorXd::Zero(w.scalar_dim())) {}

  static LatticeVector zero(const LatticeWindow& w) { return LatticeVector(w); }

  const LatticeWindow& window() const { return win_; }
  Eigen::VectorXd& data() { return v_; }
  const Eigen::VectorXd& data() const { return v_; }

  Eigen::VectorBlock<Eigen::VectorXd> node(int i) {
    return v_.segment(i * win_.node_dim(), win_.node_dim());
  }
  Eigen::VectorBlock<const Eigen::VectorXd> node(int i) const {
    return v_.segment(i * win_.node_dim(), win_.node_dim());
  }

  double sup_norm() const {
    return v_.size() == 0 ? 0.0 : v_.cwiseAbs().maxCoeff();
  }

 private:
  LatticeWindow win_;
  Eigen::VectorXd v_;
};

// Embedding of a single node value and its left inverse.
LatticeVector embed_node(const LatticeWindow& w, int node,
                         const Eigen::VectorXd& u);
Eigen::VectorXd project_node(const LatticeVector& x, int node);

LatticeVector operator+(const LatticeVector& a, const LatticeVector& b);
LatticeVector operator-(const LatticeVector& a, const LatticeVector& b);
LatticeVector operator*(double c, const LatticeVector& a);

}  // namespace lattice
