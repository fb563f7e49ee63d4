#include "lattice/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lattice {

namespace {

constexpr double kSingularCondition = 1e14;

double cblock_norm(const Eigen::MatrixXcd& b) {
  return b.cwiseAbs().rowwise().sum().maxCoeff();
}

double cdense_inf_norm(const Eigen::MatrixXcd& m) {
  return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

// Gamma norm of a dense complex matrix seen through the window's block grid.
double cdense_gamma_norm(const Eigen::MatrixXcd& m, const LatticeWindow& w,
                         const DecayFunction& gamma) {
  const int n = w.node_dim(), s = w.node_count();
  double op = 0.0, gv = 0.0;
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) {
      double bn = cblock_norm(m.block(i * n, j * n, n, n));
      row += bn;
      if (bn > 0.0) gv = std::max(gv, bn / gamma(w.diff(i, j)));
    }
    op = std::max(op, row);
  }
  return std::max(op, gv);
}

Eigen::MatrixXcd resolvent_dense(const Eigen::MatrixXcd& dense,
                                 std::complex<double> lambda) {
  Eigen::MatrixXcd shifted =
      dense - lambda * Eigen::MatrixXcd::Identity(dense.rows(), dense.cols());
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  Eigen::MatrixXcd inv = lu.inverse();
  double cond = cdense_inf_norm(shifted) * cdense_inf_norm(inv);
  if (!std::isfinite(cond) || cond > kSingularCondition)
    throw Singular("resolvent: operator is numerically singular at lambda = (" +
                   std::to_string(lambda.real()) + ", " +
                   std::to_string(lambda.imag()) + ")");
  return inv;
}

std::vector<std::complex<double>> dense_eigenvalues(
    const Eigen::MatrixXd& dense) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
  std::vector<std::complex<double>> out(static_cast<size_t>(dense.rows()));
  for (int i = 0; i < dense.rows(); ++i)
    out[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return out;
}

}  // namespace

double resolvent_gamma_norm(const BlockLinearMap& a,
                            std::complex<double> lambda,
                            const DecayFunction& gamma) {
  if (gamma.dim() != a.window().dim())
    throw PreconditionViolated("resolvent_gamma_norm: decay dimension mismatch");
  Eigen::MatrixXcd inv =
      resolvent_dense(a.to_dense().cast<std::complex<double>>(), lambda);
  return cdense_gamma_norm(inv, a.window(), gamma);
}

SpectralReport gamma_spectrum_probe(
    const std::function<BlockLinearMap(int)>& family,
    const DecayFunction& gamma, const std::vector<std::complex<double>>& grid,
    double threshold, const std::vector<int>& window_radii) {
  if (window_radii.empty())
    throw PreconditionViolated("gamma_spectrum_probe: need at least one window");
  SpectralReport report;
  report.window_radii = window_radii;
  report.threshold = threshold;

  std::vector<BlockLinearMap> ops;
  ops.reserve(window_radii.size());
  int largest = window_radii.front();
  for (int radius : window_radii) {
    ops.push_back(family(radius));
    if (radius > largest) largest = radius;
  }

  report.grid.reserve(grid.size());
  for (std::complex<double> lambda : grid) {
    SpectralReport::Point pt;
    pt.lambda = lambda;
    pt.resolvent_candidate = true;
    for (const BlockLinearMap& op : ops) {
      double value;
      try {
        value = resolvent_gamma_norm(op, lambda, gamma);
      } catch (const Singular&) {
        value = std::numeric_limits<double>::infinity();
        pt.singular = true;
      }
      pt.norms.push_back(value);
      if (!(value <= threshold)) pt.resolvent_candidate = false;
    }
    report.grid.push_back(std::move(pt));
  }

  const BlockLinearMap& big =
      ops[static_cast<size_t>(std::find(window_radii.begin(), window_radii.end(),
                                        largest) -
                              window_radii.begin())];
  report.truncated_spectrum = dense_eigenvalues(big.to_dense());
  for (std::complex<double> ev : report.truncated_spectrum) {
    if (report.grid.empty()) break;
    size_t nearest = 0;
    double best = std::abs(report.grid[0].lambda - ev);
    for (size_t t = 1; t < report.grid.size(); ++t) {
      double d = std::abs(report.grid[t].lambda - ev);
      if (d < best) {
        best = d;
        nearest = t;
      }
    }
    if (report.grid[nearest].resolvent_candidate)
      report.truncated_spectrum_covered = false;
  }
  return report;
}

GelfandSequence gelfand_sequence(const BlockLinearMap& a,
                                 const DecayFunction& gamma, int n_max) {
  if (n_max < 2)
    throw PreconditionViolated("gelfand_sequence: n_max must be >= 2");
  GelfandSequence seq;
  BlockLinearMap power = a;
  int n = 1;
  double inf = std::numeric_limits<double>::infinity();
  while (n <= n_max) {
    double norm = gamma_norm(power, gamma);
    if (!std::isfinite(norm))
      throw Overflow("gelfand_sequence: norm overflow at power " +
                     std::to_string(n));
    double value = std::pow(norm, 1.0 / n);
    inf = std::min(inf, value);
    seq.powers.push_back(n);
    seq.values.push_back(value);
    seq.running_inf.push_back(inf);
    if (n > n_max / 2) break;
    power = compose_linear(power, power, 0.0);
    n *= 2;
  }
  seq.estimate = inf;
  return seq;
}

double gelfand_radius(const BlockLinearMap& a, const DecayFunction& gamma,
                      int n_max) {
  return gelfand_sequence(a, gamma, n_max).estimate;
}

BlockLinearMap spectral_projection(const BlockLinearMap& a,
                                   const DecayFunction& gamma,
                                   std::complex<double> center, double radius,
                                   int quad_points, int max_doublings) {
  if (!(radius > 0.0))
    throw PreconditionViolated("spectral_projection: radius must be > 0");
  const LatticeWindow& w = a.window();
  Eigen::MatrixXd dense = a.to_dense();
  Eigen::MatrixXcd cdense = dense.cast<std::complex<double>>();

  for (std::complex<double> ev : dense_eigenvalues(dense)) {
    double margin = std::abs(std::abs(ev - center) - radius);
    if (margin < 1e-3 * radius)
      throw ContourTooClose("spectral_projection: eigenvalue within " +
                            std::to_string(margin) + " of the contour");
  }

  auto quadrature = [&](int nodes) {
    Eigen::MatrixXcd sum =
        Eigen::MatrixXcd::Zero(dense.rows(), dense.cols());
    for (int t = 0; t < nodes; ++t) {
      double theta = 2.0 * M_PI * t / nodes;
      std::complex<double> dir(std::cos(theta), std::sin(theta));
      std::complex<double> z = center + radius * dir;
      // resolvent_dense inverts A - z; the contour integrand is (z-A)^{-1}
      sum -= (radius * dir) * resolvent_dense(cdense, z);
    }
    return Eigen::MatrixXcd(sum / static_cast<double>(nodes));
  };

  int nodes = std::max(quad_points, 4);
  Eigen::MatrixXcd prev = quadrature(nodes);
  bool converged = false;
  Eigen::MatrixXcd cur;
  for (int step = 0; step < max_doublings; ++step) {
    nodes *= 2;
    cur = quadrature(nodes);
    if (cdense_gamma_norm(cur - prev, w, gamma) < 1e-10) {
      converged = true;
      break;
    }
    prev = cur;
  }
  if (!converged)
    throw QuadratureStalled("spectral_projection: increment above 1e-10 after " +
                            std::to_string(max_doublings) + " doublings");

  BlockLinearMap p = BlockLinearMap::from_dense(w, cur.real(), 0.0);
  double idem = gamma_norm(compose_linear(p, p, 0.0) - p, gamma);
  double comm = gamma_norm(compose_linear(a, p, 0.0) - compose_linear(p, a, 0.0),
                           gamma);
  if (!(idem <= 1e-8) || !(comm <= 1e-8))
    throw NoConvergence("spectral_projection: projection identities fail (" +
                        std::to_string(idem) + ", " + std::to_string(comm) +
                        ")");
  return p;
}

BlockLinearMap band_matrix_inverse(const std::vector<double>& coeffs,
                                   const LatticeWindow& w) {
  if (w.dim() != 1)
    throw PreconditionViolated("band_matrix_inverse: one-dimensional windows only");
  if (coeffs.empty() || coeffs[0] == 0.0)
    throw ZeroLeadingCoefficient("band_matrix_inverse: leading coefficient is zero");
  const int s = w.node_count();
  std::vector<double> b(static_cast<size_t>(s), 0.0);
  b[0] = 1.0 / coeffs[0];
  for (int d = 1; d < s; ++d) {
    double acc = 0.0;
    for (size_t t = 1; t < coeffs.size() && static_cast<int>(t) <= d; ++t)
      acc += coeffs[t] * b[static_cast<size_t>(d) - t];
    b[static_cast<size_t>(d)] = -acc / coeffs[0];
  }
  BlockLinearMap out(w);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(w.node_dim(), w.node_dim());
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j)
      out.set_block(i, j, Eigen::MatrixXd(b[static_cast<size_t>(j - i)] * id),
                    0.0);
  return out;
}

}  // namespace lattice
