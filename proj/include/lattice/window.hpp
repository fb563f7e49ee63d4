#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "lattice/errors.hpp"

namespace lattice {

// Multi-index on Z^m, m <= 4.  Kept as a fixed array so hot loops do not
// allocate.
struct MultiIndex {
  std::array<int, 4> comp{};
  int dim = 0;

  MultiIndex() = default;
  explicit MultiIndex(int m) : dim(m) {}

  int operator[](int t) const { return comp[static_cast<size_t>(t)]; }
  int& operator[](int t) { return comp[static_cast<size_t>(t)]; }

  bool operator==(const MultiIndex& o) const {
    if (dim != o.dim) return false;
    for (int t = 0; t < dim; ++t)
      if (comp[static_cast<size_t>(t)] != o.comp[static_cast<size_t>(t)]) return false;
    return true;
  }

  std::string str() const;
};

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);

enum class IndexNorm { Euclidean, Sup };

// |j| for the chosen norm on Z^m.
double index_length(const MultiIndex& j, IndexNorm norm);

// Truncated lattice {-L..L}^m with R^n data per node.  Nodes are addressed
// by a flat index in [0, node_count) in lexicographic order; everything
// outside the window is treated as zero by the operators built on top.
class LatticeWindow {
 public:
  LatticeWindow(int dim_m, int radius_L, int node_dim_n);

  int dim() const { return dim_m_; }
  int radius() const { return radius_L_; }
  int node_dim() const { return node_dim_n_; }
  int node_count() const { return node_count_; }
  // Total scalar dimension s*n of the truncated space.
  int scalar_dim() const { return node_count_ * node_dim_n_; }

  MultiIndex multi_index(int flat) const;
  // Flat index of a multi-index, or -1 if it falls outside the window.
  int flat_index(const MultiIndex& idx) const;
  // Component-wise difference of the multi-indices of two nodes.
  MultiIndex diff(int flat_i, int flat_j) const;

  bool operator==(const LatticeWindow& o) const {
    return dim_m_ == o.dim_m_ && radius_L_ == o.radius_L_ &&
           node_dim_n_ == o.node_dim_n_;
  }
  bool operator!=(const LatticeWindow& o) const { return !(*this == o); }

  std::string str() const;

 private:
  int dim_m_;
  int radius_L_;
  int node_dim_n_;
  int node_count_;
};

// Throws WindowMismatch unless the two windows agree.
void require_same_window(const LatticeWindow& a, const LatticeWindow& b,
                         const char* where);

}  // namespace lattice
