#pragma once

// Shared generators for unit and acceptance tests.

#include <random>

#include "lattice/block_linear_map.hpp"
#include "lattice/decay.hpp"
#include "lattice/multi_linear_map.hpp"
#include "lattice/poly_jet.hpp"

namespace fixtures {

inline Eigen::MatrixXd random_block(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd b(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) b(r, c) = u(rng);
  return b;
}

// Sparse map with uniformly random blocks; no decay structure imposed.
inline lattice::BlockLinearMap random_sparse_map(std::mt19937_64& rng,
                                                 const lattice::LatticeWindow& w,
                                                 double density, double scale) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lattice::BlockLinearMap out(w);
  for (int i = 0; i < w.node_count(); ++i)
    for (int j = 0; j < w.node_count(); ++j)
      if (u(rng) < density)
        out.set_block(i, j, random_block(rng, w.node_dim(), scale));
  return out;
}

// Coupling band whose block norms follow the decay profile, so gamma is
// bounded by strength independently of the window.
inline lattice::BlockLinearMap decay_coupling(std::mt19937_64& rng,
                                              const lattice::LatticeWindow& w,
                                              const lattice::DecayFunction& g,
                                              double strength) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  lattice::BlockLinearMap out(w);
  for (int i = 0; i < w.node_count(); ++i)
    for (int j = 0; j < w.node_count(); ++j) {
      if (i == j) continue;
      double envelope = strength * g(w.diff(i, j));
      out.set_block(i, j,
                    Eigen::MatrixXd::Constant(w.node_dim(), w.node_dim(),
                                              envelope * u(rng)));
    }
  return out;
}

inline Eigen::MatrixXd random_wide_block(std::mt19937_64& rng, int rows,
                                         int cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd b(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) b(r, c) = u(rng);
  return b;
}

inline lattice::LatticeVector random_vector(std::mt19937_64& rng,
                                            const lattice::LatticeWindow& w,
                                            double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  lattice::LatticeVector v(w);
  for (int i = 0; i < w.scalar_dim(); ++i) v.data()(i) = u(rng);
  return v;
}

inline lattice::MultiLinearMap random_ml(std::mt19937_64& rng,
                                         const lattice::LatticeWindow& w,
                                         int arity, double density,
                                         double scale) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lattice::MultiLinearMap out(w, arity);
  lattice::MultiLinearMap::Key key(static_cast<size_t>(arity) + 1, 0);
  while (true) {
    if (u(rng) < density)
      out.set_block(key, random_wide_block(rng, w.node_dim(),
                                           out.tensor_cols(), scale));
    int q = arity;
    for (; q >= 0; --q) {
      if (++key[static_cast<size_t>(q)] < w.node_count()) break;
      key[static_cast<size_t>(q)] = 0;
    }
    if (q < 0) break;
  }
  return out;
}

// Max absolute entry difference over the union of stored blocks.
inline double ml_max_diff(const lattice::MultiLinearMap& a,
                          const lattice::MultiLinearMap& b) {
  double worst = 0.0;
  auto scan = [&](const lattice::MultiLinearMap& x,
                  const lattice::MultiLinearMap& y) {
    x.for_each_block([&](const lattice::MultiLinearMap::Key& key,
                         const Eigen::MatrixXd& blk) {
      const Eigen::MatrixXd* other = y.block(key);
      double d = other ? (blk - *other).cwiseAbs().maxCoeff()
                       : blk.cwiseAbs().maxCoeff();
      worst = std::max(worst, d);
    });
  };
  scan(a, b);
  scan(b, a);
  return worst;
}

inline double jet_max_diff(const lattice::PolyJet& f, const lattice::PolyJet& g) {
  double worst = 0.0;
  int r = std::min(f.degree(), g.degree());
  for (int k = 1; k <= r; ++k)
    worst = std::max(worst, ml_max_diff(f.coeff(k), g.coeff(k)));
  return worst;
}

// Single-node scalar jet: coefficient of order k is coeffs[k-1].
inline lattice::PolyJet scalar_jet(const std::vector<double>& coeffs) {
  lattice::LatticeWindow w(1, 0, 1);
  lattice::PolyJet f(w, static_cast<int>(coeffs.size()));
  for (int k = 1; k <= f.degree(); ++k) {
    lattice::MultiLinearMap c(w, k);
    c.set_block(lattice::MultiLinearMap::Key(static_cast<size_t>(k) + 1, 0),
                Eigen::MatrixXd::Constant(1, 1, coeffs[static_cast<size_t>(k - 1)]));
    f.set_coeff(k, c);
  }
  return f;
}

inline double scalar_coeff(const lattice::PolyJet& f, int k) {
  const Eigen::MatrixXd* b =
      f.coeff(k).block(lattice::MultiLinearMap::Key(static_cast<size_t>(k) + 1, 0));
  return b ? (*b)(0, 0) : 0.0;
}

inline lattice::PolyJet random_jet(std::mt19937_64& rng,
                                   const lattice::LatticeWindow& w, int degree,
                                   double density, double scale) {
  lattice::PolyJet f(w, degree);
  for (int k = 1; k <= degree; ++k)
    f.set_coeff(k, random_ml(rng, w, k, density, scale));
  return f;
}

}  // namespace fixtures
