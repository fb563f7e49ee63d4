#include "lattice/sternberg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "lattice/errors.hpp"

namespace lattice {

namespace {

PolyJet pad_jet(const PolyJet& f, int degree) {
  if (f.degree() >= degree) return f;
  PolyJet out(f.window(), degree);
  for (int k = 1; k <= f.degree(); ++k) out.set_coeff(k, f.coeff(k));
  return out;
}

double lemma_lhs(double alpha, double beta, double g0, int r0, int m,
                 double e1, double e2, double e3) {
  const double g0inv = 1.0 / g0;
  return g0inv * std::pow(1.0 / alpha + e1, m) *
         (g0inv * std::pow(std::pow(beta + e1, m) + e2, r0) + e3);
}

double apriori_contraction(double alpha, double beta, double g0, int r0, int m,
                           double e1, double delta) {
  const double g0inv = 1.0 / g0;
  const double bm = std::pow(beta + e1, m);
  return g0inv * std::pow(1.0 / alpha + e1, m) *
         ((g0inv * bm + delta) * std::pow(bm + delta, r0 - 1) + delta);
}

BlockLinearMap linear_power(const BlockLinearMap& a, int m) {
  BlockLinearMap out = a;
  for (int step = 1; step < m; ++step) out = compose_linear(a, out, 0.0);
  return out;
}

const LatticeWindow& target_window(const ConjugacyTarget& target) {
  if (const auto* lin = std::get_if<BlockLinearMap>(&target))
    return lin->window();
  return std::get<PolyJet>(target).window();
}

// One application of the inverse target, exact for a linear target and a
// Newton solve for a polynomial one.
struct TargetInverse {
  const BlockLinearMap* linear = nullptr;
  const PolyJet* poly = nullptr;
  BlockLinearMap linear_inverse;
  double newton_tol = 1e-13;

  TargetInverse(const ConjugacyTarget& target, double eval_tol)
      : linear_inverse(BlockLinearMap::zero(target_window(target))) {
    newton_tol = std::max(eval_tol * 1e-2, 1e-15);
    if (const auto* lin = std::get_if<BlockLinearMap>(&target)) {
      linear = lin;
      linear_inverse = invert_linear(*lin);
    } else {
      poly = &std::get<PolyJet>(target);
    }
  }

  LatticeVector apply(const LatticeVector& v) const {
    if (linear) return linear_inverse.apply(v);
    return newton_invert_poly(*poly, v, newton_tol, 60);
  }

  LatticeVector forward(const LatticeVector& v) const {
    if (linear) return linear->apply(v);
    return jet_eval(*poly, v);
  }
};

void check_in_ball(const LatticeVector& y, const char* where) {
  if (!(y.sup_norm() <= 1.0)) {
    std::ostringstream msg;
    msg << where << ": orbit left the unit ball, |y| = " << y.sup_norm();
    throw DomainEscape(msg.str());
  }
}

}  // namespace

SternbergConfig select_m_delta(double alpha, double beta, double gamma0,
                               int r0_override, SternbergMode mode) {
  if (!(alpha > 0.0) || !(alpha <= beta))
    throw PreconditionViolated("select_m_delta: need 0 < alpha <= beta");
  if (!(beta < 1.0))
    throw NotContraction("select_m_delta: beta must be below one");
  if (!(gamma0 > 0.0) || !(gamma0 <= 1.0))
    throw PreconditionViolated("select_m_delta: gamma0 must lie in (0, 1]");
  if (r0_override < 0)
    throw PreconditionViolated("select_m_delta: negative r0 override");

  SternbergConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.mode = mode;
  cfg.nu = (alpha == beta) ? 1.0 : std::log(alpha) / std::log(beta);
  // the 1e-9 absorbs rounding when nu lands on an integer
  cfg.r0 = (r0_override > 0)
               ? r0_override
               : static_cast<int>(std::floor(cfg.nu + 1e-9)) + 1;

  const double q0 = std::pow(beta, cfg.r0) / alpha;
  if (!(q0 < 1.0))
    throw MethodInapplicable(
        "select_m_delta: beta^r0 / alpha >= 1, r0 too small");

  const double g0inv2 = 1.0 / (gamma0 * gamma0);
  cfg.m = 1;
  while (!(g0inv2 * std::pow(q0, cfg.m) < 1.0)) {
    if (++cfg.m > 1000000)
      throw MethodInapplicable("select_m_delta: no admissible m found");
  }

  double eps = 0.1;
  int halvings = 0;
  while (!(lemma_lhs(alpha, beta, gamma0, cfg.r0, cfg.m, eps, eps, eps) <
           1.0)) {
    eps *= 0.5;
    if (++halvings > 200)
      throw NoConvergence("select_m_delta: epsilon halving did not terminate");
  }
  cfg.eps1 = cfg.eps2 = cfg.eps3 = eps;

  cfg.delta = 1.0;
  halvings = 0;
  while (!(apriori_contraction(alpha, beta, gamma0, cfg.r0, cfg.m, cfg.eps1,
                               cfg.delta) < 1.0)) {
    cfg.delta *= 0.5;
    if (++halvings > 200)
      throw NoConvergence("select_m_delta: delta halving did not terminate");
  }
  cfg.contraction =
      apriori_contraction(alpha, beta, gamma0, cfg.r0, cfg.m, cfg.eps1,
                          cfg.delta);
  return cfg;
}

double estimate_contraction(const BlockLinearMap& m_op, int m, int r0,
                            double delta, const DecayFunction& gamma) {
  if (m < 1 || r0 < 1)
    throw PreconditionViolated("estimate_contraction: need m, r0 >= 1");
  if (delta < 0.0)
    throw PreconditionViolated("estimate_contraction: negative delta");
  const BlockLinearMap fwd = linear_power(m_op, m);
  const BlockLinearMap bwd = linear_power(invert_linear(m_op), m);
  const double fwd_gamma = gamma_norm(fwd, gamma);
  const double bwd_gamma = gamma_norm(bwd, gamma);
  return bwd_gamma *
         ((fwd_gamma + delta) * std::pow(op_norm(fwd) + delta, r0 - 1) +
          delta);
}

SpectralBounds node_spectrum_bounds(const BlockLinearMap& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a.to_dense());
  if (solver.info() != Eigen::Success)
    throw NoConvergence("node_spectrum_bounds: eigensolver failed");
  SpectralBounds out;
  out.alpha = solver.eigenvalues().cwiseAbs().minCoeff();
  out.beta = solver.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

SpectralBounds gelfand_spectrum_bounds(const BlockLinearMap& a,
                                       const DecayFunction& gamma, int n_max) {
  SpectralBounds out;
  out.beta = gelfand_radius(a, gamma, n_max);
  out.alpha = 1.0 / gelfand_radius(invert_linear(a), gamma, n_max);
  return out;
}

PolyJet build_S0(const PolyJet& f, int m, int r0, const DecayFunction& gamma,
                 double tol, HomologicalMethod method) {
  if (m < 1) throw PreconditionViolated("build_S0: m must be >= 1");
  if (r0 < 2) throw PreconditionViolated("build_S0: r0 must be >= 2");
  const PolyJet fm = jet_iterate(pad_jet(f, r0), m, r0);
  const NormalFormResult nf =
      compute_normal_form(fm, r0, tol, gamma, method);
  if (!nf.resonances.resonant_orders.empty()) {
    std::ostringstream msg;
    msg << "build_S0: resonant order";
    for (int k : nf.resonances.resonant_orders) msg << ' ' << k;
    throw ResonantOrder(msg.str());
  }
  PolyJet s0 = jet_invert(nf.k, r0);

  // M^-m S0(F^m) = S0 through order r0; a violation means the homological
  // solves silently lost accuracy.
  const PolyJet defect =
      conjugacy_defect_jet(pad_jet(f, r0), ConjugacyTarget(f.linear_part()),
                           s0, m);
  for (int k = 1; k <= r0; ++k) {
    if (ml_op_norm(defect.coeff(k)) > 1e-10)
      throw NoConvergence("build_S0: starting jet fails the defect check");
  }
  return s0;
}

LatticeVector newton_invert_poly(const PolyJet& h, const LatticeVector& y,
                                 double tol, int max_iter) {
  require_same_window(h.window(), y.window(), "newton_invert_poly");
  if (!(tol > 0.0))
    throw PreconditionViolated("newton_invert_poly: tol must be positive");
  if (max_iter < 0)
    throw PreconditionViolated("newton_invert_poly: negative max_iter");
  LatticeVector x = invert_linear(h.linear_part()).apply(y);
  for (int iter = 0; iter <= max_iter; ++iter) {
    const LatticeVector r = jet_eval(h, x) - y;
    if (r.sup_norm() <= tol) return x;
    if (iter == max_iter) break;
    x = x - invert_linear(jet_derivative(h, x)).apply(r);
  }
  throw NoConvergence("newton_invert_poly: residual stayed above tol");
}

LatticeVector conjugacy_iterate(const PolyJet& f, const ConjugacyTarget& target,
                                const PolyJet& s0, int m, int n,
                                const LatticeVector& x) {
  require_same_window(f.window(), s0.window(), "conjugacy_iterate");
  require_same_window(f.window(), target_window(target), "conjugacy_iterate");
  require_same_window(f.window(), x.window(), "conjugacy_iterate");
  if (m < 1 || n < 0)
    throw PreconditionViolated("conjugacy_iterate: need m >= 1, n >= 0");
  const TargetInverse inv(target, 1e-13);
  check_in_ball(x, "conjugacy_iterate");
  LatticeVector y = x;
  for (int step = 0; step < m * n; ++step) {
    y = jet_eval(f, y);
    check_in_ball(y, "conjugacy_iterate");
  }
  LatticeVector v = jet_eval(s0, y);
  for (int step = 0; step < m * n; ++step) v = inv.apply(v);
  return v;
}

ConjugacyEvalTrace conjugacy_eval_traced(const PolyJet& f,
                                         const ConjugacyTarget& target,
                                         const PolyJet& s0, int m,
                                         const LatticeVector& x, double tol,
                                         int n_max) {
  require_same_window(f.window(), s0.window(), "conjugacy_eval");
  require_same_window(f.window(), target_window(target), "conjugacy_eval");
  require_same_window(f.window(), x.window(), "conjugacy_eval");
  if (m < 1) throw PreconditionViolated("conjugacy_eval: m must be >= 1");
  if (!(tol > 0.0))
    throw PreconditionViolated("conjugacy_eval: tol must be positive");
  const TargetInverse inv(target, tol);
  check_in_ball(x, "conjugacy_eval");

  ConjugacyEvalTrace trace{jet_eval(s0, x), 0, {}};
  LatticeVector y = x;
  for (int t = 1; t <= n_max; ++t) {
    for (int step = 0; step < m; ++step) {
      y = jet_eval(f, y);
      check_in_ball(y, "conjugacy_eval");
    }
    LatticeVector v = jet_eval(s0, y);
    for (int step = 0; step < m * t; ++step) v = inv.apply(v);
    const double increment = (v - trace.value).sup_norm();
    trace.increments.push_back(increment);
    trace.value = v;
    trace.iterations = t;
    if (increment < tol) return trace;
  }
  throw NoConvergence("conjugacy_eval: increments stayed above tol");
}

LatticeVector conjugacy_eval(const PolyJet& f, const ConjugacyTarget& target,
                             const PolyJet& s0, int m, const LatticeVector& x,
                             double tol, int n_max) {
  return conjugacy_eval_traced(f, target, s0, m, x, tol, n_max).value;
}

PolyJet conjugacy_defect_jet(const PolyJet& f, const ConjugacyTarget& target,
                             const PolyJet& s0, int m) {
  require_same_window(f.window(), s0.window(), "conjugacy_defect_jet");
  require_same_window(f.window(), target_window(target),
                      "conjugacy_defect_jet");
  if (m < 1)
    throw PreconditionViolated("conjugacy_defect_jet: m must be >= 1");
  const int r0 = s0.degree();
  const PolyJet fm = jet_iterate(pad_jet(f, r0), m, r0);
  PolyJet inner = jet_compose(s0, fm, r0);
  PolyJet back(f.window(), r0);
  if (const auto* lin = std::get_if<BlockLinearMap>(&target)) {
    const BlockLinearMap inv_m = linear_power(invert_linear(*lin), m);
    back = jet_compose(PolyJet::from_linear(inv_m, r0), inner, r0);
  } else {
    const PolyJet hm =
        jet_iterate(pad_jet(std::get<PolyJet>(target), r0), m, r0);
    back = jet_compose(jet_invert(hm, r0), inner, r0);
  }
  PolyJet defect(f.window(), r0);
  for (int k = 1; k <= r0; ++k)
    defect.set_coeff(k, back.coeff(k) - s0.coeff(k));
  return defect;
}

ConjugacyReport conjugacy_residual(const PolyJet& f,
                                   const ConjugacyTarget& target,
                                   const PolyJet& s0, int m,
                                   const std::vector<LatticeVector>& samples,
                                   const DecayFunction& gamma,
                                   double tol, int n_max) {
  const TargetInverse fwd(target, tol);
  ConjugacyReport report;
  for (const LatticeVector& x : samples) {
    const ConjugacyEvalTrace at_x =
        conjugacy_eval_traced(f, target, s0, m, x, tol, n_max);
    const LatticeVector at_fx =
        conjugacy_eval(f, target, s0, m, jet_eval(f, x), tol, n_max);
    const double residual = (at_fx - fwd.forward(at_x.value)).sup_norm();
    report.residuals.push_back(residual);
    report.sup_residual = std::max(report.sup_residual, residual);
    report.iterations.push_back(at_x.iterations);
    for (std::size_t j = 0; j + 1 < at_x.increments.size(); ++j) {
      // ratios between increments already at rounding scale are noise
      if (at_x.increments[j] < 1e-13) continue;
      report.max_increment_ratio =
          std::max(report.max_increment_ratio,
                   at_x.increments[j + 1] / at_x.increments[j]);
    }
    report.increments.push_back(at_x.increments);
  }
  const PolyJet defect = conjugacy_defect_jet(f, target, s0, m);
  for (int k = 1; k <= s0.degree(); ++k)
    report.jet_agreement.push_back(ml_op_norm(defect.coeff(k)));
  double factorial = 1.0;
  for (int k = 2; k <= s0.degree(); ++k) {
    factorial *= k;
    report.derivative_gamma.push_back(factorial *
                                      ml_gamma(s0.coeff(k), gamma));
  }
  return report;
}

}  // namespace lattice
