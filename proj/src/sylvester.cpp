#include "lattice/sylvester.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lattice {

namespace {

double ml_sup_entry(const MultiLinearMap& w) {
  double sup = 0.0;
  w.for_each_block([&](const MultiLinearMap::Key&, const Eigen::MatrixXd& b) {
    sup = std::max(sup, b.cwiseAbs().maxCoeff());
  });
  return sup;
}

// m <- m * kron(p, ..., p) with arity factors; columns of m enumerate slot
// scalar indices big-endian, so slot q is the digit of stride ns^(k-q).
void right_multiply_slotwise(Eigen::MatrixXcd& m, const Eigen::MatrixXcd& p,
                             int arity) {
  const long ns = p.rows();
  long stride = 1;
  for (int q = arity; q >= 1; --q) {
    const long block = ns * stride;
    const long groups = m.cols() / block;
    Eigen::MatrixXcd slice(m.rows(), ns);
    for (long g = 0; g < groups; ++g) {
      for (long f = 0; f < stride; ++f) {
        for (long c = 0; c < ns; ++c)
          slice.col(c) = m.col(g * block + c * stride + f);
        slice *= p;
        for (long d = 0; d < ns; ++d)
          m.col(g * block + d * stride + f) = slice.col(d);
      }
    }
    stride *= ns;
  }
}

double dense_cond_inf(const Eigen::MatrixXcd& p) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(p);
  const Eigen::MatrixXcd pinv =
      lu.solve(Eigen::MatrixXcd::Identity(p.rows(), p.cols()));
  auto inf_norm = [](const Eigen::MatrixXcd& m) {
    return m.cwiseAbs().rowwise().sum().maxCoeff();
  };
  return inf_norm(p) * inf_norm(pinv);
}

}  // namespace

MultiLinearMap sylvester_apply(const SylvesterOperator& op,
                               const MultiLinearMap& w) {
  if (w.arity() != op.arity_k)
    throw ArityMismatch("sylvester_apply: operator arity " +
                        std::to_string(op.arity_k) + " vs map arity " +
                        std::to_string(w.arity()));
  require_same_window(op.left.window(), w.window(), "sylvester_apply");
  // Exact accumulation: the result feeds residual and series computations
  // where pruned far blocks would surface in gamma norms.
  const MultiLinearMap slot(MultiLinearMap::from_linear(op.right));
  const std::vector<MultiLinearMap> slots(
      static_cast<std::size_t>(op.arity_k), slot);
  const MultiLinearMap inner = compose_multi(w, slots, 0.0);
  return compose_multi(MultiLinearMap::from_linear(op.left), {inner}, 0.0);
}

bool ResonanceSet::is_resonant(int order) const {
  return std::find(resonant_orders.begin(), resonant_orders.end(), order) !=
         resonant_orders.end();
}

ResonanceSet detect_resonances(const std::vector<std::complex<double>>& spectrum,
                               int max_order, double tol) {
  if (spectrum.empty())
    throw PreconditionViolated("detect_resonances: empty spectrum");
  if (max_order < 1)
    throw PreconditionViolated("detect_resonances: max_order must be >= 1");
  if (!(tol > 0.0))
    throw PreconditionViolated("detect_resonances: tol must be positive");
  for (const auto& lam : spectrum) {
    const double r = std::abs(lam);
    if (r >= 1.0)
      throw NotContraction("detect_resonances: eigenvalue modulus " +
                           std::to_string(r) + " >= 1");
    if (r < 1e-300)
      throw NotInvertible("detect_resonances: zero eigenvalue");
  }

  ResonanceSet out;
  out.max_order = max_order;
  out.tol = tol;
  const int n = static_cast<int>(spectrum.size());
  for (int order = 2; order <= max_order; ++order) {
    double tuples = 1.0;  // C(n + order - 1, order)
    for (int t = 1; t <= order; ++t) tuples = tuples * (n + order - t) / t;
    if (tuples > 5e6)
      throw TooLarge("detect_resonances: too many factor tuples at order " +
                     std::to_string(order));

    bool hit = false;
    std::vector<int> idx(static_cast<std::size_t>(order), 0);
    while (true) {
      std::complex<double> prod(1.0, 0.0);
      for (int t : idx) prod *= spectrum[static_cast<std::size_t>(t)];
      for (int i = 0; i < n; ++i) {
        const double gap = std::abs(spectrum[static_cast<std::size_t>(i)] - prod);
        if (gap < tol) {
          hit = true;
          out.witnesses.push_back({order, i, idx, gap});
        }
      }
      // next non-decreasing tuple
      int pos = order - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) --pos;
      if (pos < 0) break;
      const int v = idx[static_cast<std::size_t>(pos)] + 1;
      for (int t = pos; t < order; ++t) idx[static_cast<std::size_t>(t)] = v;
    }
    if (hit) out.resonant_orders.push_back(order);
  }
  return out;
}

MultiLinearMap solve_homological(const BlockLinearMap& a,
                                 const MultiLinearMap& rhs,
                                 HomologicalMethod method, double tol,
                                 HomologicalInfo* info, double resonance_tol) {
  require_same_window(a.window(), rhs.window(), "solve_homological");
  if (!(tol > 0.0))
    throw PreconditionViolated("solve_homological: tol must be positive");
  if (!(resonance_tol > 0.0))
    throw PreconditionViolated("solve_homological: resonance_tol must be positive");

  const LatticeWindow& w = a.window();
  const int k = rhs.arity();
  const long ns = static_cast<long>(w.node_count()) * w.node_dim();
  if (std::pow(static_cast<double>(ns), k + 1) > 2e4)
    throw TooLarge("solve_homological: " + std::to_string(ns) + "^" +
                   std::to_string(k + 1) + " unknowns exceed the dense budget");
  long cols = 1;
  for (int q = 0; q < k; ++q) cols *= ns;

  const BlockLinearMap ainv = invert_linear(a);
  const SylvesterOperator op(ainv, a, k);
  HomologicalInfo local;
  MultiLinearMap sol = MultiLinearMap::zero(w, k);

  if (method == HomologicalMethod::Direct) {
    const Eigen::MatrixXd ad = a.to_dense();
    Eigen::EigenSolver<Eigen::MatrixXd> es(ad);
    if (es.info() != Eigen::Success)
      throw NoConvergence("solve_homological: eigensolver failed");
    const Eigen::VectorXcd d = es.eigenvalues();
    const Eigen::MatrixXcd p = es.eigenvectors();

    // Divisors depend on eigenvalues only, so the resonance check is shared
    // by the eigenbasis and LU paths.
    std::vector<std::complex<double>> colprod(static_cast<std::size_t>(cols));
    for (long col = 0; col < cols; ++col) {
      long rem = col;
      std::complex<double> prod(1.0, 0.0);
      for (int q = 0; q < k; ++q) {
        // digits are big-endian; order does not matter for the product
        prod *= d(rem % ns);
        rem /= ns;
      }
      colprod[static_cast<std::size_t>(col)] = prod;
    }
    double div_min = std::numeric_limits<double>::infinity();
    double div_max = 0.0;
    for (long rho = 0; rho < ns; ++rho) {
      for (long col = 0; col < cols; ++col) {
        const double mag =
            std::abs(colprod[static_cast<std::size_t>(col)] / d(rho) - 1.0);
        div_min = std::min(div_min, mag);
        div_max = std::max(div_max, mag);
      }
    }
    if (div_min < resonance_tol) {
      std::ostringstream msg;
      msg << "solve_homological: divisor " << div_min
          << " below resonance tolerance at arity " << k;
      throw ResonantOrder(msg.str());
    }
    local.condition = div_max / div_min;

    const Eigen::MatrixXd rhs_mat = ml_to_dense(rhs);
    const double cond_p = dense_cond_inf(p);
    if (cond_p <= 1e8) {
      local.method = "direct-eigen";
      // K~ = P^-1 K kron(P): the operator acts entrywise in the eigenbasis
      // with factor prod(d_tau) / d_rho, so (S - id) divides by that minus 1.
      Eigen::MatrixXcd work = rhs_mat.cast<std::complex<double>>();
      work = p.partialPivLu().solve(work);
      right_multiply_slotwise(work, p, k);
      for (long rho = 0; rho < ns; ++rho)
        for (long col = 0; col < cols; ++col)
          work(rho, col) /=
              colprod[static_cast<std::size_t>(col)] / d(rho) - 1.0;
      const Eigen::MatrixXcd pinv =
          p.partialPivLu().solve(Eigen::MatrixXcd::Identity(ns, ns));
      Eigen::MatrixXcd back = p * work;
      right_multiply_slotwise(back, pinv, k);
      sol = ml_from_dense(w, k, back.real(), 0.0);
    } else {
      if (ns * cols > 2500)
        throw Singular("solve_homological: eigenbasis condition " +
                       std::to_string(cond_p) +
                       " too large for the vectorized fallback");
      local.method = "direct-lu";
      // vec(B W C) = (C^T kron B) vec W, so S - id vectorizes to
      // kron(A,..,A)^T kron A^-1 - I.
      Eigen::MatrixXd big = Eigen::MatrixXd::Identity(1, 1);
      const Eigen::MatrixXd ainv_d = ainv.to_dense();
      for (int q = 0; q < k; ++q) {
        Eigen::MatrixXd next(big.rows() * ns, big.cols() * ns);
        for (long r = 0; r < big.rows(); ++r)
          for (long c = 0; c < big.cols(); ++c)
            next.block(r * ns, c * ns, ns, ns) = big(r, c) * ad;
        big = std::move(next);
      }
      const long n_vec = ns * cols;
      Eigen::MatrixXd svec(n_vec, n_vec);
      for (long r = 0; r < cols; ++r)
        for (long c = 0; c < cols; ++c)
          svec.block(r * ns, c * ns, ns, ns) = big(c, r) * ainv_d;
      svec -= Eigen::MatrixXd::Identity(n_vec, n_vec);
      const Eigen::VectorXd rhs_vec =
          Eigen::Map<const Eigen::VectorXd>(rhs_mat.data(), n_vec);
      const Eigen::VectorXd x = svec.partialPivLu().solve(rhs_vec);
      sol = ml_from_dense(
          w, k, Eigen::Map<const Eigen::MatrixXd>(x.data(), ns, cols), 0.0);
    }
  } else if (method == HomologicalMethod::Neumann) {
    local.method = "neumann";
    // Operator norms, not gamma norms: each gamma-norm factor inflates the
    // product by G(0)^-1, which would reject straightforwardly convergent
    // iterations.
    const double q = op_norm(ainv) * std::pow(op_norm(a), k);
    local.contraction = q;
    if (!(q < 1.0))
      throw MethodInapplicable(
          "solve_homological: operator norm contraction estimate " +
          std::to_string(q) + " >= 1");
    // Fixed point of K <- S(K) - rhs, i.e. K = -sum_t S^t(rhs).
    MultiLinearMap cur = -1.0 * rhs;
    const int max_iter = 10000;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
      MultiLinearMap next = sylvester_apply(op, cur) - rhs;
      const double inc = ml_sup_entry(next - cur);
      cur = std::move(next);
      if (inc <= tol * (1.0 - q)) break;
    }
    if (iter == max_iter)
      throw NoConvergence("solve_homological: Neumann iteration cap reached");
    local.iterations = iter + 1;
    sol = std::move(cur);
  } else {
    throw PreconditionViolated("solve_homological: unknown method");
  }

  const MultiLinearMap res = sylvester_apply(op, sol) - sol - rhs;
  local.residual = ml_sup_entry(res);
  if (!(local.residual <= tol))
    throw NoConvergence("solve_homological: residual " +
                        std::to_string(local.residual) + " exceeds tolerance");
  if (info) *info = local;
  return sol;
}

}  // namespace lattice
