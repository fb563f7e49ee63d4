#include "lattice/block_linear_map.hpp"

#include <cmath>
#include <vector>

namespace lattice {

double block_norm(const Eigen::MatrixXd& b) {
  if (b.size() == 0) return 0.0;
  return b.cwiseAbs().rowwise().sum().maxCoeff();
}

BlockLinearMap BlockLinearMap::identity(const LatticeWindow& w) {
  return uncoupled(w, Eigen::MatrixXd::Identity(w.node_dim(), w.node_dim()));
}

BlockLinearMap BlockLinearMap::uncoupled(const LatticeWindow& w,
                                         const Eigen::MatrixXd& a) {
  if (a.rows() != w.node_dim() || a.cols() != w.node_dim())
    throw PreconditionViolated("BlockLinearMap::uncoupled: block shape mismatch");
  BlockLinearMap out(w);
  for (int i = 0; i < w.node_count(); ++i) out.set_block(i, i, a);
  return out;
}

void BlockLinearMap::set_block(int i, int j, const Eigen::MatrixXd& b,
                               double prune_tol) {
  const int s = win_.node_count(), n = win_.node_dim();
  if (i < 0 || i >= s || j < 0 || j >= s)
    throw PreconditionViolated("BlockLinearMap::set_block: index out of range");
  if (b.rows() != n || b.cols() != n)
    throw PreconditionViolated("BlockLinearMap::set_block: block shape mismatch");
  op_norm_cache_.reset();
  long long key = static_cast<long long>(i) * s + j;
  if (block_norm(b) <= prune_tol)
    blocks_.erase(key);
  else
    blocks_[key] = b;
}

void BlockLinearMap::add_to_block(int i, int j, const Eigen::MatrixXd& b,
                                  double prune_tol) {
  const Eigen::MatrixXd* cur = block(i, j);
  set_block(i, j, cur ? Eigen::MatrixXd(*cur + b) : b, prune_tol);
}

const Eigen::MatrixXd* BlockLinearMap::block(int i, int j) const {
  auto it = blocks_.find(static_cast<long long>(i) * win_.node_count() + j);
  return it == blocks_.end() ? nullptr : &it->second;
}

LatticeVector BlockLinearMap::apply(const LatticeVector& x) const {
  require_same_window(win_, x.window(), "BlockLinearMap::apply");
  LatticeVector y(win_);
  for_each_block([&](int i, int j, const Eigen::MatrixXd& b) {
    y.node(i) += b * x.node(j);
  });
  return y;
}

Eigen::MatrixXd BlockLinearMap::to_dense() const {
  const int n = win_.node_dim();
  Eigen::MatrixXd dense =
      Eigen::MatrixXd::Zero(win_.scalar_dim(), win_.scalar_dim());
  for_each_block([&](int i, int j, const Eigen::MatrixXd& b) {
    dense.block(i * n, j * n, n, n) = b;
  });
  return dense;
}

BlockLinearMap BlockLinearMap::from_dense(const LatticeWindow& w,
                                          const Eigen::MatrixXd& dense,
                                          double prune_tol) {
  if (dense.rows() != w.scalar_dim() || dense.cols() != w.scalar_dim())
    throw PreconditionViolated("BlockLinearMap::from_dense: size mismatch");
  const int n = w.node_dim();
  BlockLinearMap out(w);
  for (int i = 0; i < w.node_count(); ++i)
    for (int j = 0; j < w.node_count(); ++j)
      out.set_block(i, j, dense.block(i * n, j * n, n, n), prune_tol);
  return out;
}

double op_norm(const BlockLinearMap& a) {
  if (a.op_norm_cache_) return *a.op_norm_cache_;
  std::vector<double> row_sum(static_cast<size_t>(a.window().node_count()), 0.0);
  a.for_each_block([&](int i, int, const Eigen::MatrixXd& b) {
    row_sum[static_cast<size_t>(i)] += block_norm(b);
  });
  double best = 0.0;
  for (double r : row_sum) best = std::max(best, r);
  a.op_norm_cache_ = best;
  return best;
}

double gamma_value(const BlockLinearMap& a, const DecayFunction& gamma) {
  if (gamma.dim() != a.window().dim())
    throw PreconditionViolated("gamma_value: decay dimension mismatch");
  double worst = 0.0;
  a.for_each_block([&](int i, int j, const Eigen::MatrixXd& b) {
    worst = std::max(worst, block_norm(b) / gamma(a.window().diff(i, j)));
  });
  return worst;
}

double gamma_norm(const BlockLinearMap& a, const DecayFunction& gamma) {
  return std::max(op_norm(a), gamma_value(a, gamma));
}

BlockLinearMap operator+(const BlockLinearMap& a, const BlockLinearMap& b) {
  require_same_window(a.window(), b.window(), "BlockLinearMap::operator+");
  BlockLinearMap out = a;
  b.for_each_block([&](int i, int j, const Eigen::MatrixXd& blk) {
    out.add_to_block(i, j, blk);
  });
  return out;
}

BlockLinearMap operator-(const BlockLinearMap& a, const BlockLinearMap& b) {
  require_same_window(a.window(), b.window(), "BlockLinearMap::operator-");
  BlockLinearMap out = a;
  b.for_each_block([&](int i, int j, const Eigen::MatrixXd& blk) {
    out.add_to_block(i, j, Eigen::MatrixXd(-blk));
  });
  return out;
}

BlockLinearMap operator*(double c, const BlockLinearMap& a) {
  BlockLinearMap out(a.window());
  a.for_each_block([&](int i, int j, const Eigen::MatrixXd& blk) {
    out.set_block(i, j, Eigen::MatrixXd(c * blk));
  });
  return out;
}

BlockLinearMap compose_linear(const BlockLinearMap& a,
                              const BlockLinearMap& b, double prune_tol) {
  require_same_window(a.window(), b.window(), "compose_linear");
  // Group B's blocks by row so each A_ik only meets matching B_k*.
  const int s = b.window().node_count();
  std::vector<std::vector<std::pair<int, const Eigen::MatrixXd*>>> b_rows(
      static_cast<size_t>(s));
  b.for_each_block([&](int k, int j, const Eigen::MatrixXd& blk) {
    b_rows[static_cast<size_t>(k)].emplace_back(j, &blk);
  });
  // Accumulate exactly, prune once at the end; mid-sum pruning could drop
  // partial values whose total survives the cutoff.
  std::map<long long, Eigen::MatrixXd> acc;
  a.for_each_block([&](int i, int k, const Eigen::MatrixXd& ab) {
    for (const auto& [j, bb] : b_rows[static_cast<size_t>(k)]) {
      long long key = static_cast<long long>(i) * s + j;
      auto it = acc.find(key);
      if (it == acc.end())
        acc.emplace(key, ab * (*bb));
      else
        it->second += ab * (*bb);
    }
  });
  BlockLinearMap out(a.window());
  for (const auto& [key, blk] : acc)
    out.set_block(static_cast<int>(key / s), static_cast<int>(key % s), blk,
                  prune_tol);
  return out;
}

BlockLinearMap neumann_invert(const BlockLinearMap& m0_inverse,
                              const BlockLinearMap& m1,
                              const DecayFunction& gamma, double tol,
                              int max_terms) {
  require_same_window(m0_inverse.window(), m1.window(), "neumann_invert");
  const double n0 = gamma_norm(m0_inverse, gamma);
  const double n1 = gamma_norm(m1, gamma);
  const double q = n0 * n1;
  if (!(q < 1.0))
    throw PreconditionViolated(
        "neumann_invert: ||M0^-1||_G ||M1||_G = " + std::to_string(q) +
        " >= 1");
  // Residual after truncation is M1 * (last term) up to sign, so cut the
  // series where that product is below tol/(1-q).
  double tol_eff = (n1 > 1.0) ? tol / ((1.0 - q) * n1) : tol;

  // Accumulate with prune 0: dropping a far block of absolute size 1e-17
  // can already cost 1e-17/G(i-j) in the gamma residual, far above tol.
  BlockLinearMap minus_c(m0_inverse.window());
  compose_linear(m0_inverse, m1, 0.0)
      .for_each_block([&](int i, int j, const Eigen::MatrixXd& blk) {
        minus_c.set_block(i, j, Eigen::MatrixXd(-blk), 0.0);
      });
  BlockLinearMap term = m0_inverse;
  BlockLinearMap sum = term;
  for (int j = 1; j <= max_terms; ++j) {
    if (gamma_norm(term, gamma) < tol_eff) return sum;
    term = compose_linear(minus_c, term, 0.0);
    term.for_each_block([&](int bi, int bj, const Eigen::MatrixXd& blk) {
      sum.add_to_block(bi, bj, blk, 0.0);
    });
  }
  if (gamma_norm(term, gamma) < tol_eff) return sum;
  throw NoConvergence("neumann_invert: series did not reach tolerance in " +
                      std::to_string(max_terms) + " terms");
}

BlockLinearMap invert_linear(const BlockLinearMap& a) {
  Eigen::MatrixXd dense = a.to_dense();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
  Eigen::MatrixXd inv = lu.inverse();
  double resid = (dense * inv - Eigen::MatrixXd::Identity(dense.rows(),
                                                          dense.cols()))
                     .cwiseAbs()
                     .maxCoeff();
  if (!std::isfinite(resid) || resid > 1e-6)
    throw NotInvertible("invert_linear: truncated operator is singular"
                        " (residual " + std::to_string(resid) + ")");
  return BlockLinearMap::from_dense(a.window(), inv);
}

}  // namespace lattice
