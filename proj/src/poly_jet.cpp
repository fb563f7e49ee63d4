#include "lattice/poly_jet.hpp"

#include <functional>
#include <string>

namespace lattice {

namespace {

void check_order(int k, int degree, const char* who) {
  if (k < 1 || k > degree)
    throw PreconditionViolated(std::string(who) + ": order " +
                               std::to_string(k) + " outside 1.." +
                               std::to_string(degree));
}

// Ordered tuples of positive integers with the given sum; the callback sees
// each tuple once.  Expanding multilinearity over a graded sum produces
// exactly these tuples, so no explicit multinomial constants appear.
void for_each_composition(int sum, int parts,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> tuple(static_cast<size_t>(parts));
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == parts - 1) {
      if (left >= 1) {
        tuple[static_cast<size_t>(pos)] = left;
        fn(tuple);
      }
      return;
    }
    for (int v = 1; v <= left - (parts - 1 - pos); ++v) {
      tuple[static_cast<size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  if (parts >= 1 && sum >= parts) rec(0, sum);
}

}  // namespace

PolyJet::PolyJet(const LatticeWindow& w, int degree) : win_(w), degree_(degree) {
  if (degree < 1) throw PreconditionViolated("PolyJet: degree must be >= 1");
  coeffs_.reserve(static_cast<size_t>(degree));
  for (int k = 1; k <= degree; ++k) coeffs_.emplace_back(w, k);
}

PolyJet PolyJet::identity(const LatticeWindow& w, int degree) {
  return from_linear(BlockLinearMap::identity(w), degree);
}

PolyJet PolyJet::from_linear(const BlockLinearMap& a, int degree) {
  PolyJet out(a.window(), degree);
  out.coeffs_[0] = symmetrize(MultiLinearMap::from_linear(a));
  return out;
}

const MultiLinearMap& PolyJet::coeff(int k) const {
  check_order(k, degree_, "PolyJet::coeff");
  return coeffs_[static_cast<size_t>(k - 1)];
}

void PolyJet::set_coeff(int k, const MultiLinearMap& c) {
  check_order(k, degree_, "PolyJet::set_coeff");
  require_same_window(win_, c.window(), "PolyJet::set_coeff");
  if (c.arity() != k)
    throw ArityMismatch("PolyJet::set_coeff: arity " +
                        std::to_string(c.arity()) + " for order " +
                        std::to_string(k));
  coeffs_[static_cast<size_t>(k - 1)] =
      c.symmetric_flag() ? c : symmetrize(c);
}

PolyJet jet_compose(const PolyJet& g, const PolyJet& f, int r) {
  require_same_window(g.window(), f.window(), "jet_compose");
  if (r < 1 || r > g.degree() || r > f.degree())
    throw PreconditionViolated("jet_compose: degree budget exceeded");
  PolyJet out(g.window(), r);
  for (int k = 1; k <= r; ++k) {
    MultiLinearMap acc(g.window(), k);
    for (int j = 1; j <= k; ++j) {
      if (g.coeff(j).block_count() == 0) continue;
      for_each_composition(k, j, [&](const std::vector<int>& tuple) {
        std::vector<MultiLinearMap> inner;
        inner.reserve(tuple.size());
        for (int i : tuple) {
          if (f.coeff(i).block_count() == 0) return;
          inner.push_back(f.coeff(i));
        }
        acc = acc + compose_multi(g.coeff(j), inner);
      });
    }
    out.set_coeff(k, acc);
  }
  return out;
}

PolyJet jet_invert(const PolyJet& f, int r) {
  if (r < 1 || r > f.degree())
    throw PreconditionViolated("jet_invert: degree budget exceeded");
  BlockLinearMap f1_inv = invert_linear(f.linear_part());
  PolyJet g(f.window(), r);
  g.set_coeff(1, MultiLinearMap::from_linear(f1_inv));
  // Order k of g(f(x)) = x reads G_k F_1^{tensor k} = -(lower-order terms);
  // peel G_k by precomposing every slot with F_1^{-1}.
  for (int k = 2; k <= r; ++k) {
    MultiLinearMap t(f.window(), k);
    for (int j = 1; j < k; ++j) {
      if (g.coeff(j).block_count() == 0) continue;
      for_each_composition(k, j, [&](const std::vector<int>& tuple) {
        std::vector<MultiLinearMap> inner;
        inner.reserve(tuple.size());
        for (int i : tuple) {
          if (f.coeff(i).block_count() == 0) return;
          inner.push_back(f.coeff(i));
        }
        t = t + compose_multi(g.coeff(j), inner);
      });
    }
    std::vector<MultiLinearMap> slots(
        static_cast<size_t>(k), MultiLinearMap::from_linear(f1_inv));
    g.set_coeff(k, -1.0 * compose_multi(t, slots));
  }
  return g;
}

PolyJet jet_iterate(const PolyJet& f, int m, int r) {
  if (m < 1) throw PreconditionViolated("jet_iterate: m must be >= 1");
  if (r < 1 || r > f.degree())
    throw PreconditionViolated("jet_iterate: degree budget exceeded");
  PolyJet out(f.window(), r);
  for (int k = 1; k <= r; ++k) out.set_coeff(k, f.coeff(k));
  for (int step = 1; step < m; ++step) out = jet_compose(f, out, r);
  return out;
}

LatticeVector jet_eval(const PolyJet& f, const LatticeVector& x) {
  require_same_window(f.window(), x.window(), "jet_eval");
  LatticeVector y(f.window());
  for (int k = 1; k <= f.degree(); ++k) {
    if (f.coeff(k).block_count() == 0) continue;
    std::vector<LatticeVector> args(static_cast<size_t>(k), x);
    y = y + f.coeff(k).apply(args);
  }
  return y;
}

BlockLinearMap jet_derivative(const PolyJet& f, const LatticeVector& x) {
  require_same_window(f.window(), x.window(), "jet_derivative");
  BlockLinearMap d = f.linear_part();
  for (int k = 2; k <= f.degree(); ++k) {
    if (f.coeff(k).block_count() == 0) continue;
    std::vector<int> slots(static_cast<size_t>(k - 1));
    for (int q = 0; q < k - 1; ++q) slots[static_cast<size_t>(q)] = q;
    std::vector<LatticeVector> args(static_cast<size_t>(k - 1), x);
    d = d + static_cast<double>(k) *
                contract(f.coeff(k), slots, args).to_linear();
  }
  return d;
}

PolyJet rescale(const PolyJet& f, double delta) {
  if (!(delta > 0.0)) throw PreconditionViolated("rescale: delta must be > 0");
  PolyJet out(f.window(), f.degree());
  double scale = 1.0;
  for (int k = 1; k <= f.degree(); ++k) {
    out.set_coeff(k, scale * f.coeff(k));
    scale *= delta;
  }
  return out;
}

}  // namespace lattice
