#include "lattice/multi_linear_map.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <utility>

namespace lattice {

namespace {

// Upper cap keeping block column counts and compose fan-out at desk scale.
constexpr int kMaxArity = 6;

int checked_tensor_cols(int n, int arity) {
  double cols = std::pow(static_cast<double>(n), arity);
  if (arity > kMaxArity || cols > 1e7)
    throw TooLarge("MultiLinearMap: arity " + std::to_string(arity) +
                   " with node dim " + std::to_string(n) +
                   " exceeds the supported size");
  return static_cast<int>(std::llround(cols));
}

void decode_digits(int col, int n, int arity, std::vector<int>& out) {
  out.resize(static_cast<size_t>(arity));
  for (int q = arity - 1; q >= 0; --q) {
    out[static_cast<size_t>(q)] = col % n;
    col /= n;
  }
}

}  // namespace

MultiLinearMap::MultiLinearMap(const LatticeWindow& w, int arity)
    : win_(w), arity_(arity) {
  if (arity < 1)
    throw PreconditionViolated("MultiLinearMap: arity must be >= 1");
  tensor_cols_ = checked_tensor_cols(w.node_dim(), arity);
}

MultiLinearMap MultiLinearMap::from_linear(const BlockLinearMap& a) {
  MultiLinearMap out(a.window(), 1);
  a.for_each_block([&](int i, int j, const Eigen::MatrixXd& b) {
    out.blocks_[{i, j}] = b;
  });
  return out;
}

BlockLinearMap MultiLinearMap::to_linear() const {
  if (arity_ != 1)
    throw ArityMismatch("MultiLinearMap::to_linear: arity " +
                        std::to_string(arity_));
  BlockLinearMap out(win_);
  for (const auto& [key, b] : blocks_) out.set_block(key[0], key[1], b, 0.0);
  return out;
}

void MultiLinearMap::check_key(const Key& key) const {
  if (static_cast<int>(key.size()) != arity_ + 1)
    throw PreconditionViolated("MultiLinearMap: key length " +
                               std::to_string(key.size()) + " for arity " +
                               std::to_string(arity_));
  for (int v : key)
    if (v < 0 || v >= win_.node_count())
      throw PreconditionViolated("MultiLinearMap: node index out of range");
}

void MultiLinearMap::set_block(const Key& key, const Eigen::MatrixXd& b,
                               double prune_tol) {
  check_key(key);
  if (b.rows() != win_.node_dim() || b.cols() != tensor_cols_)
    throw PreconditionViolated("MultiLinearMap::set_block: block shape mismatch");
  symmetric_ = false;
  if (block_norm(b) <= prune_tol)
    blocks_.erase(key);
  else
    blocks_[key] = b;
}

void MultiLinearMap::add_to_block(const Key& key, const Eigen::MatrixXd& b,
                                  double prune_tol) {
  const Eigen::MatrixXd* cur = block(key);
  set_block(key, cur ? Eigen::MatrixXd(*cur + b) : b, prune_tol);
}

const Eigen::MatrixXd* MultiLinearMap::block(const Key& key) const {
  auto it = blocks_.find(key);
  return it == blocks_.end() ? nullptr : &it->second;
}

int MultiLinearMap::column_index(const std::vector<int>& digits) const {
  int col = 0;
  for (int d : digits) col = col * win_.node_dim() + d;
  return col;
}

LatticeVector MultiLinearMap::apply(
    const std::vector<LatticeVector>& vectors) const {
  if (static_cast<int>(vectors.size()) != arity_)
    throw ArityMismatch("MultiLinearMap::apply: got " +
                        std::to_string(vectors.size()) + " vectors for arity " +
                        std::to_string(arity_));
  for (const auto& v : vectors)
    require_same_window(win_, v.window(), "MultiLinearMap::apply");
  LatticeVector y(win_);
  Eigen::VectorXd t;
  for (const auto& [key, b] : blocks_) {
    t = Eigen::VectorXd::Ones(1);
    for (int q = 0; q < arity_; ++q)
      t = Eigen::kroneckerProduct(
              t, vectors[static_cast<size_t>(q)].node(key[static_cast<size_t>(
                     q + 1)]))
              .eval();
    y.node(key[0]) += b * t;
  }
  return y;
}

double ml_op_norm(const MultiLinearMap& w) {
  std::map<int, double> row_sum;
  w.for_each_block([&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& b) {
    row_sum[key[0]] += block_norm(b);
  });
  double best = 0.0;
  for (const auto& [i, r] : row_sum) best = std::max(best, r);
  return best;
}

double ml_gamma(const MultiLinearMap& w, const DecayFunction& gamma) {
  if (gamma.dim() != w.window().dim())
    throw PreconditionViolated("ml_gamma: decay dimension mismatch");
  double worst = 0.0;
  for (int p = 0; p < w.arity(); ++p) {
    // Sum-over-free-slots rule for the slot-p section at each (i, j_p).
    std::map<std::pair<int, int>, double> acc;
    w.for_each_block(
        [&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& b) {
          acc[{key[0], key[static_cast<size_t>(p + 1)]}] += block_norm(b);
        });
    for (const auto& [ij, s] : acc)
      worst = std::max(s / gamma(w.window().diff(ij.first, ij.second)), worst);
  }
  return worst;
}

double ml_gamma_norm(const MultiLinearMap& w, const DecayFunction& gamma) {
  return std::max(ml_op_norm(w), ml_gamma(w, gamma));
}

MultiLinearMap operator+(const MultiLinearMap& a, const MultiLinearMap& b) {
  require_same_window(a.window(), b.window(), "MultiLinearMap::operator+");
  if (a.arity() != b.arity())
    throw ArityMismatch("MultiLinearMap::operator+: arity mismatch");
  MultiLinearMap out = a;
  b.for_each_block([&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& blk) {
    out.add_to_block(key, blk);
  });
  out.symmetric_ = a.symmetric_ && b.symmetric_;
  return out;
}

MultiLinearMap operator-(const MultiLinearMap& a, const MultiLinearMap& b) {
  return a + (-1.0 * b);
}

MultiLinearMap operator*(double c, const MultiLinearMap& a) {
  MultiLinearMap out(a.window(), a.arity());
  a.for_each_block([&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& blk) {
    out.set_block(key, Eigen::MatrixXd(c * blk));
  });
  out.symmetric_ = a.symmetric_;
  return out;
}

MultiLinearMap contract(const MultiLinearMap& w, const std::vector<int>& slots,
                        const std::vector<LatticeVector>& vectors) {
  const int k = w.arity(), p = static_cast<int>(slots.size());
  if (vectors.size() != slots.size())
    throw PreconditionViolated("contract: slots/vectors length mismatch");
  if (p < 1 || p > k - 1)
    throw SlotOutOfRange("contract: need 1 <= contracted slots <= arity-1"
                         " (full contraction is apply)");
  std::vector<bool> used(static_cast<size_t>(k), false);
  for (int s : slots) {
    if (s < 0 || s >= k) throw SlotOutOfRange("contract: slot out of range");
    if (used[static_cast<size_t>(s)])
      throw SlotOutOfRange("contract: duplicate slot");
    used[static_cast<size_t>(s)] = true;
  }
  for (const auto& v : vectors)
    require_same_window(w.window(), v.window(), "contract");

  const int n = w.window().node_dim();
  std::vector<int> kept;  // slots surviving, original order
  for (int q = 0; q < k; ++q)
    if (!used[static_cast<size_t>(q)]) kept.push_back(q);
  // slot -> position in the contraction lists, -1 if kept
  std::vector<int> cpos(static_cast<size_t>(k), -1);
  for (int t = 0; t < p; ++t) cpos[static_cast<size_t>(slots[t])] = t;

  MultiLinearMap out(w.window(), k - p);
  std::map<MultiLinearMap::Key, Eigen::MatrixXd> acc;
  std::vector<int> digits, rdigits(kept.size());
  w.for_each_block([&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& b) {
    MultiLinearMap::Key rkey(kept.size() + 1);
    rkey[0] = key[0];
    for (size_t r = 0; r < kept.size(); ++r)
      rkey[r + 1] = key[static_cast<size_t>(kept[r] + 1)];
    Eigen::MatrixXd red = Eigen::MatrixXd::Zero(n, out.tensor_cols());
    for (int c = 0; c < b.cols(); ++c) {
      decode_digits(c, n, k, digits);
      double wgt = 1.0;
      for (int q = 0; q < k; ++q)
        if (cpos[static_cast<size_t>(q)] >= 0) {
          const auto& u = vectors[static_cast<size_t>(cpos[static_cast<size_t>(q)])];
          wgt *= u.node(key[static_cast<size_t>(q + 1)])(
              digits[static_cast<size_t>(q)]);
        }
      if (wgt == 0.0) continue;
      for (size_t r = 0; r < kept.size(); ++r)
        rdigits[r] = digits[static_cast<size_t>(kept[r])];
      red.col(out.column_index(rdigits)) += wgt * b.col(c);
    }
    auto it = acc.find(rkey);
    if (it == acc.end())
      acc.emplace(std::move(rkey), std::move(red));
    else
      it->second += red;
  });
  for (const auto& [key, blk] : acc) out.set_block(key, blk);
  return out;
}

MultiLinearMap symmetrize(const MultiLinearMap& w) {
  const int k = w.arity(), n = w.window().node_dim();
  MultiLinearMap out(w.window(), k);
  if (k == 1) {
    out = w;
    out.symmetric_ = true;
    return out;
  }
  double fact = 1.0;
  for (int q = 2; q <= k; ++q) fact *= q;
  const double inv_fact = 1.0 / fact;

  std::map<MultiLinearMap::Key, Eigen::MatrixXd> acc;
  std::vector<int> perm(static_cast<size_t>(k));
  for (int q = 0; q < k; ++q) perm[static_cast<size_t>(q)] = q;
  std::vector<int> digits, pdigits(static_cast<size_t>(k));
  do {
    w.for_each_block([&](const MultiLinearMap::Key& key,
                         const Eigen::MatrixXd& b) {
      // Slot q of the input becomes slot perm[q] of the output; column
      // digits move with their slots.
      MultiLinearMap::Key pkey(static_cast<size_t>(k) + 1);
      pkey[0] = key[0];
      for (int q = 0; q < k; ++q)
        pkey[static_cast<size_t>(perm[static_cast<size_t>(q)]) + 1] =
            key[static_cast<size_t>(q) + 1];
      Eigen::MatrixXd pb = Eigen::MatrixXd::Zero(n, b.cols());
      for (int c = 0; c < b.cols(); ++c) {
        decode_digits(c, n, k, digits);
        for (int q = 0; q < k; ++q)
          pdigits[static_cast<size_t>(perm[static_cast<size_t>(q)])] =
              digits[static_cast<size_t>(q)];
        pb.col(out.column_index(pdigits)) = b.col(c);
      }
      auto it = acc.find(pkey);
      if (it == acc.end())
        acc.emplace(std::move(pkey), Eigen::MatrixXd(inv_fact * pb));
      else
        it->second += inv_fact * pb;
    });
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (const auto& [key, blk] : acc) out.set_block(key, blk);
  out.symmetric_ = true;
  return out;
}

MultiLinearMap compose_multi(const MultiLinearMap& a,
                             const std::vector<MultiLinearMap>& bs,
                             double prune_tol) {
  const int k = a.arity();
  if (static_cast<int>(bs.size()) != k)
    throw ArityMismatch("compose_multi: got " + std::to_string(bs.size()) +
                        " inner maps for arity " + std::to_string(k));
  int arity_out = 0;
  for (const auto& b : bs) {
    require_same_window(a.window(), b.window(), "compose_multi");
    arity_out += b.arity();
  }
  MultiLinearMap out(a.window(), arity_out);

  // Inner blocks grouped by output node so each A column index t_q only
  // meets the matching B^q rows.
  const int s = a.window().node_count();
  using Entry = std::pair<const MultiLinearMap::Key*, const Eigen::MatrixXd*>;
  std::vector<std::vector<std::vector<Entry>>> rows(static_cast<size_t>(k));
  for (int q = 0; q < k; ++q) {
    rows[static_cast<size_t>(q)].resize(static_cast<size_t>(s));
    bs[static_cast<size_t>(q)].for_each_block(
        [&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& blk) {
          rows[static_cast<size_t>(q)][static_cast<size_t>(key[0])]
              .emplace_back(&key, &blk);
        });
  }

  std::map<MultiLinearMap::Key, Eigen::MatrixXd> acc;
  a.for_each_block([&](const MultiLinearMap::Key& akey,
                       const Eigen::MatrixXd& ab) {
    std::vector<const std::vector<Entry>*> lists(static_cast<size_t>(k));
    for (int q = 0; q < k; ++q) {
      lists[static_cast<size_t>(q)] =
          &rows[static_cast<size_t>(q)]
               [static_cast<size_t>(akey[static_cast<size_t>(q) + 1])];
      if (lists[static_cast<size_t>(q)]->empty()) return;
    }
    std::vector<size_t> pick(static_cast<size_t>(k), 0);
    while (true) {
      Eigen::MatrixXd kron = Eigen::MatrixXd::Ones(1, 1);
      MultiLinearMap::Key okey;
      okey.reserve(static_cast<size_t>(arity_out) + 1);
      okey.push_back(akey[0]);
      for (int q = 0; q < k; ++q) {
        const Entry& e =
            (*lists[static_cast<size_t>(q)])[pick[static_cast<size_t>(q)]];
        kron = Eigen::kroneckerProduct(kron, *e.second).eval();
        okey.insert(okey.end(), e.first->begin() + 1, e.first->end());
      }
      Eigen::MatrixXd contrib = ab * kron;
      auto it = acc.find(okey);
      if (it == acc.end())
        acc.emplace(std::move(okey), std::move(contrib));
      else
        it->second += contrib;
      int q = k - 1;
      for (; q >= 0; --q) {
        if (++pick[static_cast<size_t>(q)] <
            lists[static_cast<size_t>(q)]->size())
          break;
        pick[static_cast<size_t>(q)] = 0;
      }
      if (q < 0) break;
    }
  });
  for (const auto& [key, blk] : acc) out.set_block(key, blk, prune_tol);
  return out;
}

Eigen::MatrixXd ml_to_dense(const MultiLinearMap& w) {
  const int n = w.window().node_dim(), k = w.arity();
  const long long ns = w.window().scalar_dim();
  double cols_d = std::pow(static_cast<double>(ns), k);
  if (static_cast<double>(ns) * cols_d > 2e7)
    throw TooLarge("ml_to_dense: flattened size exceeds desk scale");
  const long long cols = static_cast<long long>(std::llround(cols_d));
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(ns, cols);
  std::vector<int> digits;
  w.for_each_block([&](const MultiLinearMap::Key& key, const Eigen::MatrixXd& b) {
    for (int c = 0; c < b.cols(); ++c) {
      decode_digits(c, n, k, digits);
      long long col = 0;
      for (int q = 0; q < k; ++q)
        col = col * ns + key[static_cast<size_t>(q) + 1] * n +
              digits[static_cast<size_t>(q)];
      for (int r = 0; r < n; ++r) dense(key[0] * n + r, col) = b(r, c);
    }
  });
  return dense;
}

MultiLinearMap ml_from_dense(const LatticeWindow& w, int arity,
                             const Eigen::MatrixXd& dense, double prune_tol) {
  MultiLinearMap out(w, arity);
  const int n = w.node_dim();
  const long long ns = w.scalar_dim();
  double cols_d = std::pow(static_cast<double>(ns), arity);
  if (dense.rows() != ns ||
      dense.cols() != static_cast<long long>(std::llround(cols_d)))
    throw PreconditionViolated("ml_from_dense: size mismatch");
  // odometer over node keys; read the block out of the scattered columns
  MultiLinearMap::Key key(static_cast<size_t>(arity) + 1, 0);
  std::vector<int> digits;
  while (true) {
    Eigen::MatrixXd blk(n, out.tensor_cols());
    for (int c = 0; c < out.tensor_cols(); ++c) {
      decode_digits(c, n, arity, digits);
      long long col = 0;
      for (int q = 0; q < arity; ++q)
        col = col * ns + key[static_cast<size_t>(q) + 1] * n +
              digits[static_cast<size_t>(q)];
      for (int r = 0; r < n; ++r) blk(r, c) = dense(key[0] * n + r, col);
    }
    out.set_block(key, blk, prune_tol);
    int q = arity;
    for (; q >= 0; --q) {
      if (++key[static_cast<size_t>(q)] < w.node_count()) break;
      key[static_cast<size_t>(q)] = 0;
    }
    if (q < 0) break;
  }
  return out;
}

}  // namespace lattice
