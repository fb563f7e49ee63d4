#include <cmath>
#include <random>

#include "doctest.h"
#include "lattice/decay.hpp"

using namespace lattice;

namespace {

// Brute-force oracles, written against the definition only; they share no
// code path with the verifier.
double brute_gamma_1d(double a, double alpha, double theta, int j) {
  if (j == 0) return a;
  double r = std::abs(static_cast<double>(j));
  return a * std::pow(r, -alpha) * std::exp(-theta * r);
}

double brute_window_sum_1d(double a, double alpha, double theta, int L) {
  double s = 0.0;
  for (int k = -L; k <= L; ++k) s += brute_gamma_1d(a, alpha, theta, k);
  return s;
}

// min over all window pairs of G(i-j) - sum_k G(i-k)G(k-j).
double brute_conv_margin_1d(double a, double alpha, double theta, int L) {
  double worst = 1e300;
  for (int i = -L; i <= L; ++i)
    for (int j = -L; j <= L; ++j) {
      double lhs = 0.0;
      for (int k = -L; k <= L; ++k)
        lhs += brute_gamma_1d(a, alpha, theta, i - k) *
               brute_gamma_1d(a, alpha, theta, k - j);
      worst = std::min(worst, brute_gamma_1d(a, alpha, theta, i - j) - lhs);
    }
  return worst;
}

}  // namespace

TEST_CASE("power-exp decay at (2,1) m=1 L=50 verifies; sums match brute force") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 50);
  REQUIRE(g.certificate().has_value());
  const DecayReport& rep = *g.certificate();
  CHECK(rep.passed());
  CHECK(rep.sum_margin >= 0.0);
  CHECK(rep.conv_margin >= 0.0);
  CHECK(rep.conv_mode == "exact_pairs");
  CHECK(g.amplitude() > 0.0);
  CHECK(g.amplitude() <= 1.0);

  double a = g.amplitude();
  double bs = brute_window_sum_1d(a, 2.0, 1.0, 50);
  CHECK(rep.window_sum == doctest::Approx(bs).epsilon(1e-12));
  CHECK(bs + rep.tail_bound <= 1.0);
  double bm = brute_conv_margin_1d(a, 2.0, 1.0, 50);
  CHECK(bm >= 0.0);
  CHECK(rep.conv_margin == doctest::Approx(bm).epsilon(1e-9));
}

TEST_CASE("amplitude search regression anchors") {
  // frozen outputs of the grid+bisection search; guards accidental changes
  // to the search or the margins it certifies
  CHECK(make_power_exp_decay(2.0, 1.0, 1, 50).amplitude() ==
        doctest::Approx(0.148521189699962).epsilon(1e-9));
  CHECK(make_power_exp_decay(3.0, 0.0, 1, 50).amplitude() ==
        doctest::Approx(0.0940698764700083).epsilon(1e-9));
  CHECK(make_power_exp_decay(3.0, 0.0, 2, 20).amplitude() ==
        doctest::Approx(0.0499441991107262).epsilon(1e-9));
}

TEST_CASE("remaining criterion-1 parameter sets verify") {
  for (auto [alpha, theta] : {std::pair{3.0, 0.0}, std::pair{1.5, 0.5}}) {
    DecayFunction g = make_power_exp_decay(alpha, theta, 1, 50);
    CHECK(g.certificate()->passed());
  }
  DecayFunction g2 = make_power_exp_decay(3.0, 0.0, 2, 20);
  CHECK(g2.certificate()->passed());
  CHECK(g2.certificate()->conv_mode == "difference_certificate");
}

TEST_CASE("alpha <= dim with theta 0 is not summable") {
  CHECK_THROWS_AS(make_power_exp_decay(0.5, 0.0, 1, 50), NotSummable);
  CHECK_THROWS_AS(make_power_exp_decay(2.0, 0.0, 2, 10), NotSummable);
}

TEST_CASE("normalized pure exponential fails the convolution check") {
  const int L = 50;
  const double theta = 1.0;
  double sum = 0.0;
  for (int k = -L; k <= L; ++k) sum += std::exp(-theta * std::abs(k));
  const double C = 1.0 / sum;
  ProfileFn exp_profile = [=](const MultiIndex& j) {
    return C * std::exp(-theta * index_length(j, IndexNorm::Euclidean));
  };
  DecayReport rep = verify_decay(exp_profile, 1, L, 0.0);
  CHECK(rep.sum_ok);
  CHECK_FALSE(rep.conv_ok);
  CHECK(rep.conv_margin < 0.0);
  // the worst pair stretches across the window, where the middle terms pile up
  CHECK(std::abs(rep.worst_i[0] - rep.worst_j[0]) > 1);
}

TEST_CASE("profile scaled past unit mass fails summability") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 30);
  double sum = 0.0;
  for (int k = -30; k <= 30; ++k) sum += g(k);
  const double scale = 2.0 / sum;
  ProfileFn scaled = [=](const MultiIndex& j) { return scale * g(j); };
  DecayReport rep = verify_decay(scaled, 1, 30, 0.0);
  CHECK_FALSE(rep.sum_ok);
}

TEST_CASE("tail bound: base cases, monotonicity, factor-2 tightness") {
  DecayFunction g = make_power_exp_decay(2.0, 1.0, 1, 50);
  CHECK(decay_tail(g, 0) <= 1.0 - g.amplitude());

  double prev = decay_tail(g, 5);
  for (int L : {10, 20, 40}) {
    double cur = decay_tail(g, L);
    CHECK(cur < prev);
    prev = cur;
  }

  double brute = 0.0;
  for (int k = 51; k <= 10'000; ++k)
    brute += 2.0 * brute_gamma_1d(g.amplitude(), 2.0, 1.0, k);
  double bound = decay_tail(g, 50);
  CHECK(bound >= brute);
  CHECK(bound <= 2.0 * brute);
}

TEST_CASE("certificate pass implies sampled window pairs pass at m=2") {
  DecayFunction g = make_power_exp_decay(3.0, 0.0, 2, 10);
  REQUIRE(g.certificate()->passed());
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    MultiIndex i(2), j(2);
    i[0] = coord(rng);
    i[1] = coord(rng);
    j[0] = coord(rng);
    j[1] = coord(rng);
    double lhs = 0.0;
    for (int k1 = -10; k1 <= 10; ++k1)
      for (int k2 = -10; k2 <= 10; ++k2) {
        MultiIndex k(2);
        k[0] = k1;
        k[1] = k2;
        lhs += g(i - k) * g(k - j);
      }
    CHECK(lhs <= g(i - j));
  }
}

TEST_CASE("sup-norm index option changes off-axis values only") {
  DecayFunction ge = make_power_exp_decay(3.0, 0.5, 2, 8, IndexNorm::Euclidean);
  DecayFunction gs = make_power_exp_decay(3.0, 0.5, 2, 8, IndexNorm::Sup);
  CHECK(gs.certificate()->passed());
  MultiIndex axis(2), diag(2);
  axis[0] = 3;
  axis[1] = 0;
  diag[0] = 3;
  diag[1] = 3;
  // same radius on the axis, smaller radius (hence larger value) on the
  // diagonal for the sup norm, up to the amplitude normalization
  CHECK(ge(axis) / ge.amplitude() == doctest::Approx(gs(axis) / gs.amplitude()));
  CHECK(gs(diag) / gs.amplitude() > ge(diag) / ge.amplitude());
}

TEST_CASE("profile is even and radially non-increasing") {
  DecayFunction g = make_power_exp_decay(1.5, 0.5, 1, 50);
  for (int j = 1; j <= 100; ++j) {
    CHECK(g(j) == g(-j));
    CHECK(g(j) <= g(j - 1));
  }
}

TEST_CASE("random family members stay verifiable") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(1.2, 4.0), ut(0.0, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    double alpha = ua(rng), theta = ut(rng);
    if (theta == 0.0) theta = 0.1;
    DecayFunction g = make_power_exp_decay(alpha, theta, 1, 30);
    CHECK(g.certificate()->passed());
  }
}
