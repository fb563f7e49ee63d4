#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "lattice/spectrum.hpp"

using namespace lattice;
using cplx = std::complex<double>;

namespace {

BlockLinearMap two_level(const LatticeWindow& w) {
  Eigen::MatrixXd a(2, 2);
  a << 0.3, 0.0, 0.0, 0.5;
  return BlockLinearMap::uncoupled(w, a);
}

BlockLinearMap band_operator(const std::vector<double>& coeffs,
                             const LatticeWindow& w) {
  BlockLinearMap out(w);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(w.node_dim(), w.node_dim());
  for (int i = 0; i < w.node_count(); ++i)
    for (size_t t = 0; t < coeffs.size(); ++t) {
      int j = i + static_cast<int>(t);
      if (j < w.node_count())
        out.set_block(i, j, Eigen::MatrixXd(coeffs[t] * id), 0.0);
    }
  return out;
}

}  // namespace

TEST_CASE("resolvent_gamma_norm: uncoupled value, singularity, decay at infinity") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  LatticeWindow w(1, 5, 1);
  BlockLinearMap a =
      BlockLinearMap::uncoupled(w, Eigen::MatrixXd::Constant(1, 1, 0.5));

  CHECK(resolvent_gamma_norm(a, cplx(2.0, 0.0), g) ==
        doctest::Approx(1.0 / (g(0) * 1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(resolvent_gamma_norm(a, cplx(0.5, 0.0), g), Singular);
  CHECK(resolvent_gamma_norm(a, cplx(1e6, 0.0), g) <= 1e-5);
  // imaginary offsets work on the complexified operator
  CHECK(resolvent_gamma_norm(a, cplx(0.5, 0.1), g) ==
        doctest::Approx(1.0 / (g(0) * 0.1)).epsilon(1e-10));
}

TEST_CASE("gamma_spectrum_probe: two-level operator classification") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  auto family = [](int radius) {
    return two_level(LatticeWindow(1, radius, 2));
  };
  std::vector<cplx> grid;
  for (int t = 0; t <= 40; ++t) grid.emplace_back(0.025 * t, 0.0);
  SpectralReport rep = gamma_spectrum_probe(family, g, grid, 110.0, {3, 5});

  REQUIRE(rep.grid.size() == grid.size());
  for (const auto& pt : rep.grid) {
    double dist = std::min(std::abs(pt.lambda - cplx(0.3, 0.0)),
                           std::abs(pt.lambda - cplx(0.5, 0.0)));
    // gamma norm is G(0)^{-1}/dist; with threshold 110 the cut sits between
    // the d = 0.05 value (134.7) and the d = 0.075 value (89.8)
    bool expect_resolvent = dist > 0.051;
    CHECK(pt.resolvent_candidate == expect_resolvent);
    if (dist < 1e-12) CHECK(pt.singular);
    // uncoupled operators cannot feel the window size
    REQUIRE(pt.norms.size() == 2);
    if (!pt.singular)
      CHECK(pt.norms[0] == doctest::Approx(pt.norms[1]).epsilon(1e-12));
  }
  CHECK(rep.truncated_spectrum_covered);
  CHECK(rep.threshold == 110.0);
}

TEST_CASE("gamma_spectrum_probe: zero map and empty-ish grids") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  auto family = [](int radius) {
    return BlockLinearMap::zero(LatticeWindow(1, radius, 1));
  };
  std::vector<cplx> grid = {{0.5, 0.0}, {0.0, 0.7}, {-0.3, 0.0}, {0.0, 0.0}};
  SpectralReport rep = gamma_spectrum_probe(family, g, grid, 100.0, {3});
  for (size_t t = 0; t < 3; ++t) CHECK(rep.grid[t].resolvent_candidate);
  CHECK(rep.grid[3].singular);
  CHECK(rep.truncated_spectrum_covered);
}

TEST_CASE("band inverse: closed form coefficients and identity case") {
  LatticeWindow w(1, 15, 1);
  BlockLinearMap b = band_matrix_inverse({1.0, -0.75, 0.125}, w);
  for (int j = 0; j <= 30; ++j) {
    const Eigen::MatrixXd* blk = b.block(0, j);
    double want = 2.0 * std::pow(0.5, j) - std::pow(0.25, j);
    REQUIRE(blk != nullptr);
    CHECK((*blk)(0, 0) == doctest::Approx(want).epsilon(1e-12));
  }
  // inverse of the truncated band operator agrees (triangular, no boundary)
  BlockLinearMap a = band_operator({1.0, -0.75, 0.125}, w);
  CHECK(op_norm(compose_linear(a, b) - BlockLinearMap::identity(w)) <= 1e-12);

  BlockLinearMap id = band_matrix_inverse({1.0}, w);
  CHECK(op_norm(id - BlockLinearMap::identity(w)) == 0.0);

  CHECK_THROWS_AS(band_matrix_inverse({0.0, 1.0}, w), ZeroLeadingCoefficient);
}

TEST_CASE("band inverse gamma growth depends on the exponential rate") {
  // b_j ~ 2^{-j}: bounded against exp(-theta j) iff theta < log 2
  auto gamma_at = [](double theta, int radius) {
    DecayFunction g = make_power_exp_decay(2.0, theta, 1, 20);
    LatticeWindow w(1, radius, 1);
    return gamma_value(band_matrix_inverse({1.0, -0.75, 0.125}, w), g);
  };
  double slow_small = gamma_at(0.5, 8), slow_big = gamma_at(0.5, 16);
  CHECK(slow_big / slow_small <= 1.02);
  double fast_small = gamma_at(0.8, 8), fast_big = gamma_at(0.8, 16);
  CHECK(fast_big / fast_small >= 2.0);
}

TEST_CASE("gelfand radius: two-level, identity, nilpotent shift, overflow") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  LatticeWindow w(1, 4, 2);

  GelfandSequence seq = gelfand_sequence(two_level(w), g, 128);
  CHECK(std::abs(seq.estimate - 0.5) <= 0.05);
  for (size_t t = 1; t < seq.running_inf.size(); ++t)
    CHECK(seq.running_inf[t] <= seq.running_inf[t - 1] + 1e-15);
  CHECK(seq.powers.back() == 128);

  double id_est = gelfand_radius(BlockLinearMap::identity(w), g, 128);
  CHECK(id_est >= 1.0);
  CHECK(id_est - 1.0 <= std::pow(1.0 / g(0), 1.0 / 128.0) - 1.0 + 1e-12);

  LatticeWindow ws(1, 3, 1);
  BlockLinearMap shift(ws);
  for (int i = 0; i + 1 < ws.node_count(); ++i)
    shift.set_block(i, i + 1, Eigen::MatrixXd::Identity(1, 1));
  CHECK(gelfand_radius(shift, g, 64) == 0.0);

  BlockLinearMap huge =
      BlockLinearMap::uncoupled(ws, Eigen::MatrixXd::Constant(1, 1, 1e200));
  CHECK_THROWS_AS(gelfand_radius(huge, g, 8), Overflow);
  CHECK_THROWS_AS(gelfand_radius(shift, g, 1), PreconditionViolated);
}

TEST_CASE("gelfand estimate dominates the truncated spectral radius") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  LatticeWindow w(1, 3, 2);
  std::mt19937_64 rng(909);
  for (int trial = 0; trial < 5; ++trial) {
    BlockLinearMap a = fixtures::random_sparse_map(rng, w, 0.4, 0.5);
    Eigen::MatrixXd dense = a.to_dense();
    double rho = dense.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(gelfand_radius(a, g, 64) >= rho - 1e-6);
  }
}

TEST_CASE("spectral_projection: two-level split, full and empty contours") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  LatticeWindow w(1, 3, 2);
  BlockLinearMap a = two_level(w);

  SUBCASE("circle around 0.3 picks the first level") {
    BlockLinearMap p = spectral_projection(a, g, cplx(0.3, 0.0), 0.1);
    Eigen::MatrixXd sel(2, 2);
    sel << 1.0, 0.0, 0.0, 0.0;
    CHECK(op_norm(p - BlockLinearMap::uncoupled(w, sel)) <= 1e-8);
    // restriction acts as multiplication by 0.3
    BlockLinearMap pap = compose_linear(p, compose_linear(a, p));
    CHECK(op_norm(pap - 0.3 * p) <= 1e-8);

    BlockLinearMap q = spectral_projection(a, g, cplx(0.5, 0.0), 0.1);
    CHECK(gamma_norm(p + q - BlockLinearMap::identity(w), g) <= 1e-8);
    BlockLinearMap qaq = compose_linear(q, compose_linear(a, q));
    CHECK(op_norm(qaq - 0.5 * q) <= 1e-8);
  }

  SUBCASE("contour around everything gives the identity") {
    BlockLinearMap p = spectral_projection(a, g, cplx(0.4, 0.0), 0.5);
    CHECK(gamma_norm(p - BlockLinearMap::identity(w), g) <= 1e-8);
  }

  SUBCASE("contour around nothing gives zero") {
    BlockLinearMap p = spectral_projection(a, g, cplx(2.0, 0.0), 0.3);
    CHECK(gamma_norm(p, g) <= 1e-8);
  }

  SUBCASE("contour through an eigenvalue is rejected") {
    CHECK_THROWS_AS(spectral_projection(a, g, cplx(0.25, 0.0), 0.05),
                    ContourTooClose);
  }

  SUBCASE("zero doubling budget stalls") {
    CHECK_THROWS_AS(spectral_projection(a, g, cplx(0.3, 0.0), 0.1, 4, 0),
                    QuadratureStalled);
  }
}

TEST_CASE("spectral_projection: coupled operator with power-law decay") {
  DecayFunction g = make_power_exp_decay(3.0, 0.0, 1, 40);
  LatticeWindow w(1, 4, 2);
  std::mt19937_64 rng(910);
  BlockLinearMap a = two_level(w) + fixtures::decay_coupling(rng, w, g, 0.01);

  BlockLinearMap p = spectral_projection(a, g, cplx(0.3, 0.0), 0.1);
  BlockLinearMap q = spectral_projection(a, g, cplx(0.5, 0.0), 0.1);
  CHECK(gamma_norm(p + q - BlockLinearMap::identity(w), g) <= 1e-8);

  // restricted spectra stay separated near their uncoupled values
  Eigen::MatrixXd pap = compose_linear(p, compose_linear(a, p)).to_dense();
  Eigen::MatrixXd qaq = compose_linear(q, compose_linear(a, q)).to_dense();
  for (auto ev : pap.eigenvalues()) {
    double d = std::min(std::abs(ev - cplx(0.3, 0.0)), std::abs(ev));
    CHECK(d <= 0.05);
  }
  for (auto ev : qaq.eigenvalues()) {
    double d = std::min(std::abs(ev - cplx(0.5, 0.0)), std::abs(ev));
    CHECK(d <= 0.05);
  }
}

TEST_CASE("resolvent classification survives small perturbations") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 40);
  LatticeWindow w(1, 4, 2);
  std::mt19937_64 rng(911);
  BlockLinearMap a = two_level(w) + fixtures::decay_coupling(rng, w, g, 0.02);
  const cplx mu(0.8, 0.0);
  double r = resolvent_gamma_norm(a, mu, g);

  for (int trial = 0; trial < 10; ++trial) {
    BlockLinearMap b0 = fixtures::random_sparse_map(rng, w, 0.3, 1.0);
    BlockLinearMap b = (1.0 / (2.0 * r * gamma_norm(b0, g))) * b0;
    CHECK(resolvent_gamma_norm(a + b, mu, g) <= 2.0 * r * (1.0 + 1e-9));
  }
}
