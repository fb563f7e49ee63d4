#include "lattice/lattice_vector.hpp"

namespace lattice {

LatticeVector embed_node(const LatticeWindow& w, int node,
                         const Eigen::VectorXd& u) {
  if (node < 0 || node >= w.node_count())
    throw PreconditionViolated("embed_node: node out of range");
  if (u.size() != w.node_dim())
    throw PreconditionViolated("embed_node: value dimension mismatch");
  LatticeVector x(w);
  x.node(node) = u;
  return x;
}

Eigen::VectorXd project_node(const LatticeVector& x, int node) {
  if (node < 0 || node >= x.window().node_count())
    throw PreconditionViolated("project_node: node out of range");
  return x.node(node);
}

LatticeVector operator+(const LatticeVector& a, const LatticeVector& b) {
  require_same_window(a.window(), b.window(), "LatticeVector::operator+");
  LatticeVector out = a;
  out.data() += b.data();
  return out;
}

LatticeVector operator-(const LatticeVector& a, const LatticeVector& b) {
  require_same_window(a.window(), b.window(), "LatticeVector::operator-");
  LatticeVector out = a;
  out.data() -= b.data();
  return out;
}

LatticeVector operator*(double c, const LatticeVector& a) {
  LatticeVector out = a;
  out.data() *= c;
  return out;
}

}  // namespace lattice
