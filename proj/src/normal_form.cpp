#include "lattice/normal_form.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

namespace lattice {

namespace {

PolyJet pad_jet(const PolyJet& f, int degree) {
  if (f.degree() >= degree) return f;
  PolyJet out(f.window(), degree);
  for (int k = 1; k <= f.degree(); ++k) out.set_coeff(k, f.coeff(k));
  return out;
}

}  // namespace

NormalFormResult compute_normal_form(const PolyJet& f, int r, double tol,
                                     const DecayFunction& gamma,
                                     HomologicalMethod method,
                                     double resonance_tol) {
  if (r < 2)
    throw PreconditionViolated("compute_normal_form: r must be >= 2");
  if (!(tol > 0.0))
    throw PreconditionViolated("compute_normal_form: tol must be positive");

  const LatticeWindow& w = f.window();
  const PolyJet fr = pad_jet(f, r);
  const BlockLinearMap a = fr.linear_part();
  const BlockLinearMap ainv = invert_linear(a);

  Eigen::EigenSolver<Eigen::MatrixXd> es(a.to_dense());
  if (es.info() != Eigen::Success)
    throw NoConvergence("compute_normal_form: eigensolver failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const std::vector<std::complex<double>> spectrum(ev.data(),
                                                   ev.data() + ev.size());
  ResonanceSet resonances = detect_resonances(spectrum, r, resonance_tol);

  PolyJet kjet = PolyJet::identity(w, r);
  PolyJet hjet = PolyJet::from_linear(a, r);
  // The order-k residual coefficient is A times the homological residual, so
  // budget the solve accordingly.
  const double solve_tol = tol / std::max(1.0, op_norm(a));
  std::vector<HomologicalInfo> solves;

  for (int k = 2; k <= r; ++k) {
    // The partial jets have no order >= k terms, so order k of these
    // compositions is exactly the known inhomogeneity of the order-k
    // equation A K_k + G1 = H_k + K_k A^{tensor k} + G2.
    const MultiLinearMap g1 = jet_compose(fr, kjet, k).coeff(k);
    const MultiLinearMap g2 = jet_compose(kjet, hjet, k).coeff(k);
    const MultiLinearMap g = g1 - g2;
    if (resonances.is_resonant(k)) {
      hjet.set_coeff(k, g);
    } else {
      // A K_k - K_k A^{tensor k} = -G_k, i.e. (S - id) K_k = A^{-1} G_k
      // for S(W) = A^{-1} W(A., ..., A.).
      const MultiLinearMap rhs =
          compose_multi(MultiLinearMap::from_linear(ainv), {g}, 0.0);
      HomologicalInfo info;
      kjet.set_coeff(
          k, solve_homological(a, rhs, method, solve_tol, &info, resonance_tol));
      solves.push_back(info);
    }
  }

  const PolyJet fk = jet_compose(fr, kjet, r);
  const PolyJet kh = jet_compose(kjet, hjet, r);
  PolyJet residual(w, r);
  double worst = 0.0;
  for (int k = 1; k <= r; ++k) {
    const MultiLinearMap d = fk.coeff(k) - kh.coeff(k);
    residual.set_coeff(k, d);
    worst = std::max(worst, ml_op_norm(d));
  }
  if (!(worst <= tol))
    throw NoConvergence("compute_normal_form: residual coefficient norm " +
                        std::to_string(worst) + " exceeds tolerance");

  std::vector<double> k_gamma, h_gamma;
  for (int k = 1; k <= r; ++k) {
    k_gamma.push_back(ml_gamma(kjet.coeff(k), gamma));
    h_gamma.push_back(ml_gamma(hjet.coeff(k), gamma));
  }
  return NormalFormResult{std::move(kjet),     std::move(hjet),
                          std::move(resonances), std::move(residual),
                          std::move(k_gamma),  std::move(h_gamma),
                          std::move(solves)};
}

NfResidualReport nf_residual(const PolyJet& f, const PolyJet& k,
                             const PolyJet& h, int r,
                             const std::vector<LatticeVector>& samples) {
  if (r < 1)
    throw PreconditionViolated("nf_residual: r must be >= 1");
  require_same_window(f.window(), k.window(), "nf_residual");
  require_same_window(f.window(), h.window(), "nf_residual");

  const PolyJet fr = pad_jet(f, r);
  const PolyJet kr = pad_jet(k, r);
  const PolyJet hr = pad_jet(h, r);
  const PolyJet fk = jet_compose(fr, kr, r);
  const PolyJet kh = jet_compose(kr, hr, r);

  NfResidualReport report;
  for (int q = 1; q <= r; ++q) {
    const double norm = ml_op_norm(fk.coeff(q) - kh.coeff(q));
    report.order_norms.push_back(norm);
    report.max_order_norm = std::max(report.max_order_norm, norm);
  }
  for (const LatticeVector& x : samples) {
    const LatticeVector res =
        jet_eval(fr, jet_eval(kr, x)) - jet_eval(kr, jet_eval(hr, x));
    const double rn = res.sup_norm();
    const double xn = x.sup_norm();
    report.sample_norms.push_back(rn);
    report.sample_ratios.push_back(xn > 0.0 ? rn / std::pow(xn, r) : 0.0);
  }
  return report;
}

}  // namespace lattice
