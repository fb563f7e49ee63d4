#include "lattice/window.hpp"

#include <cmath>
#include <sstream>

namespace lattice {

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << "(";
  for (int t = 0; t < dim; ++t) os << (t ? "," : "") << comp[static_cast<size_t>(t)];
  os << ")";
  return os.str();
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex d(a.dim);
  for (int t = 0; t < a.dim; ++t) d[t] = a[t] - b[t];
  return d;
}

double index_length(const MultiIndex& j, IndexNorm norm) {
  if (norm == IndexNorm::Sup) {
    int m = 0;
    for (int t = 0; t < j.dim; ++t) m = std::max(m, std::abs(j[t]));
    return static_cast<double>(m);
  }
  double s = 0.0;
  for (int t = 0; t < j.dim; ++t) {
    double c = static_cast<double>(j[t]);
    s += c * c;
  }
  return std::sqrt(s);
}

LatticeWindow::LatticeWindow(int dim_m, int radius_L, int node_dim_n)
    : dim_m_(dim_m), radius_L_(radius_L), node_dim_n_(node_dim_n) {
  if (dim_m < 1 || dim_m > 4)
    throw PreconditionViolated("LatticeWindow: dim must be in [1,4]");
  if (radius_L < 0) throw PreconditionViolated("LatticeWindow: radius must be >= 0");
  if (node_dim_n < 1) throw PreconditionViolated("LatticeWindow: node_dim must be >= 1");
  long long count = 1;
  for (int t = 0; t < dim_m; ++t) count *= 2LL * radius_L + 1;
  if (count > 1'000'000)
    throw PreconditionViolated("LatticeWindow: node count exceeds desk scale");
  node_count_ = static_cast<int>(count);
}

MultiIndex LatticeWindow::multi_index(int flat) const {
  MultiIndex idx(dim_m_);
  int side = 2 * radius_L_ + 1;
  for (int t = dim_m_ - 1; t >= 0; --t) {
    idx[t] = flat % side - radius_L_;
    flat /= side;
  }
  return idx;
}

int LatticeWindow::flat_index(const MultiIndex& idx) const {
  int side = 2 * radius_L_ + 1;
  int flat = 0;
  for (int t = 0; t < dim_m_; ++t) {
    int c = idx[t];
    if (c < -radius_L_ || c > radius_L_) return -1;
    flat = flat * side + (c + radius_L_);
  }
  return flat;
}

MultiIndex LatticeWindow::diff(int flat_i, int flat_j) const {
  return multi_index(flat_i) - multi_index(flat_j);
}

std::string LatticeWindow::str() const {
  std::ostringstream os;
  os << "{m=" << dim_m_ << ",L=" << radius_L_ << ",n=" << node_dim_n_ << "}";
  return os.str();
}

void require_same_window(const LatticeWindow& a, const LatticeWindow& b,
                         const char* where) {
  if (a != b)
    throw WindowMismatch(std::string(where) + ": windows differ, " + a.str() +
                         " vs " + b.str());
}

}  // namespace lattice
