#include "lattice/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lattice {

namespace {

// Profile values over the difference cube {-2L..2L}^m.  The convolution
// inequality only ever sees differences of window nodes, so this table is
// enough for every check below.
struct ProfileTable {
  int m, L;
  LatticeWindow wide;  // radius 2L
  LatticeWindow win;   // radius L
  std::vector<double> g;

  ProfileTable(const ProfileFn& f, int dim_m, int window_L)
      : m(dim_m), L(window_L), wide(dim_m, 2 * window_L, 1),
        win(dim_m, window_L, 1), g(static_cast<size_t>(wide.node_count())) {
    for (int t = 0; t < wide.node_count(); ++t) {
      double v = f(wide.multi_index(t));
      if (!std::isfinite(v) || v < 0.0)
        throw PreconditionViolated(
            "verify_decay: profile must be finite and non-negative");
      g[static_cast<size_t>(t)] = v;
    }
  }

  double at(const MultiIndex& d) const {
    int t = wide.flat_index(d);
    if (t < 0)
      throw PreconditionViolated("verify_decay: profile index out of range");
    return g[static_cast<size_t>(t)];
  }

  double window_sum() const {
    double s = 0.0;
    for (int t = 0; t < win.node_count(); ++t) s += at(win.multi_index(t));
    return s;
  }

  // Exact windowed convolution sum for one pair (i,j).
  double pair_sum(const MultiIndex& i, const MultiIndex& j) const {
    double s = 0.0;
    for (int t = 0; t < win.node_count(); ++t) {
      MultiIndex k = win.multi_index(t);
      s += at(i - k) * at(k - j);
    }
    return s;
  }
};

struct ConvScan {
  double margin = std::numeric_limits<double>::infinity();
  MultiIndex worst_i, worst_j;
  double worst_lhs = 0.0, worst_rhs = 0.0;
  std::string mode;
};

// m = 1: every window pair, exactly.
ConvScan conv_scan_exact_1d(const ProfileTable& tab) {
  ConvScan out;
  out.mode = "exact_pairs";
  const int L = tab.L;
  const int off = 2 * L;  // shift into the wide table
  auto gv = [&](int c) { return tab.g[static_cast<size_t>(c + off)]; };
  for (int i = -L; i <= L; ++i) {
    for (int j = -L; j <= L; ++j) {
      double lhs = 0.0;
      for (int k = -L; k <= L; ++k) lhs += gv(i - k) * gv(k - j);
      double rhs = gv(i - j);
      double margin = rhs - lhs;
      if (margin < out.margin) {
        out.margin = margin;
        out.worst_i = MultiIndex(1);
        out.worst_i[0] = i;
        out.worst_j = MultiIndex(1);
        out.worst_j[0] = j;
        out.worst_lhs = lhs;
        out.worst_rhs = rhs;
      }
    }
  }
  return out;
}

// Per-difference certificate values: for every d in the cube,
// (rhs, lhs) = (g(d), T(d)) with T(d) = sum_{u,d-u in cube} g(d-u)g(u),
// an upper bound for every window pair sum with i-j = d.
std::vector<std::pair<double, double>> difference_table(
    const ProfileTable& tab) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<size_t>(tab.wide.node_count()));
  const int side = 4 * tab.L + 1;
  const int R = 2 * tab.L;
  if (tab.m == 2) {
    auto gv = [&](int c1, int c2) {
      return tab.g[static_cast<size_t>((c1 + R) * side + (c2 + R))];
    };
    for (int d1 = -R; d1 <= R; ++d1) {
      for (int d2 = -R; d2 <= R; ++d2) {
        double T = 0.0;
        int u1lo = std::max(-R, d1 - R), u1hi = std::min(R, d1 + R);
        int u2lo = std::max(-R, d2 - R), u2hi = std::min(R, d2 + R);
        for (int u1 = u1lo; u1 <= u1hi; ++u1)
          for (int u2 = u2lo; u2 <= u2hi; ++u2)
            T += gv(u1, u2) * gv(d1 - u1, d2 - u2);
        out.emplace_back(gv(d1, d2), T);
      }
    }
  } else {
    for (int td = 0; td < tab.wide.node_count(); ++td) {
      MultiIndex d = tab.wide.multi_index(td);
      double T = 0.0;
      for (int tu = 0; tu < tab.wide.node_count(); ++tu) {
        MultiIndex u = tab.wide.multi_index(tu);
        int tr = tab.wide.flat_index(d - u);
        if (tr < 0) continue;
        T += tab.g[static_cast<size_t>(tu)] * tab.g[static_cast<size_t>(tr)];
      }
      out.emplace_back(tab.g[static_cast<size_t>(td)], T);
    }
  }
  return out;
}

// m >= 2: certificate scan.  The reported pair is the centered witness
// realizing the worst difference inside the window, with its exact sum.
ConvScan conv_scan_certificate(const ProfileTable& tab) {
  ConvScan out;
  out.mode = "difference_certificate";
  std::vector<std::pair<double, double>> diffs = difference_table(tab);
  int argmin = 0;
  for (int td = 0; td < static_cast<int>(diffs.size()); ++td) {
    double margin = diffs[static_cast<size_t>(td)].first -
                    diffs[static_cast<size_t>(td)].second;
    if (margin < out.margin) {
      out.margin = margin;
      argmin = td;
    }
  }
  MultiIndex worst_d = tab.wide.multi_index(argmin);
  out.worst_rhs = diffs[static_cast<size_t>(argmin)].first;
  // Centered witness pair: i = ceil(d/2), j = -floor(d/2); both stay inside
  // the window for any |d_t| <= 2L.
  out.worst_i = MultiIndex(tab.m);
  out.worst_j = MultiIndex(tab.m);
  for (int t = 0; t < tab.m; ++t) {
    int d = worst_d[t];
    int fl = (d >= 0) ? d / 2 : -((-d + 1) / 2);
    out.worst_j[t] = -fl;
    out.worst_i[t] = d - fl;
  }
  out.worst_lhs = tab.pair_sum(out.worst_i, out.worst_j);
  return out;
}

ConvScan conv_scan(const ProfileTable& tab) {
  return tab.m == 1 ? conv_scan_exact_1d(tab) : conv_scan_certificate(tab);
}

// Tail bound for the unit-amplitude power-exponential profile: explicit
// sup-norm shells L+1..shells_end (count (2t+1)^m-(2t-1)^m times shell max),
// then an integral comparison for the remainder.
double unit_tail_bound(double alpha, double theta, int m, int L) {
  if (theta == 0.0 && alpha <= static_cast<double>(m))
    throw NotSummable("decay_tail: alpha <= dim with theta = 0");
  const double p = static_cast<double>(m) - 1.0 - alpha;
  long long shells_end = L + 64;
  if (theta > 0.0 && p > 0.0)
    shells_end = std::max(shells_end,
                          static_cast<long long>(std::ceil(p / theta)) + 1);
  if (shells_end > 2'000'000)
    throw PreconditionViolated("decay_tail: tail bound not computable");
  double total = 0.0;
  for (long long t = L + 1; t <= shells_end; ++t) {
    double td = static_cast<double>(t);
    double count = std::pow(2.0 * td + 1.0, m) - std::pow(2.0 * td - 1.0, m);
    total += count * std::pow(td, -alpha) * std::exp(-theta * td);
  }
  // Remainder: count(t) <= 2m 3^(m-1) t^(m-1), and t^p e^(-theta t) is
  // non-increasing past shells_end by construction.
  const double S = static_cast<double>(shells_end);
  const double cm = 2.0 * m * std::pow(3.0, m - 1);
  double integral;
  if (theta == 0.0) {
    integral = std::pow(S, p + 1.0) / (alpha - static_cast<double>(m));
  } else if (p <= 0.0) {
    integral = std::exp(-theta * S) * std::pow(S, p) / theta;
    if (alpha > static_cast<double>(m))
      integral = std::min(integral, std::exp(-theta * S) * std::pow(S, p + 1.0) /
                                        (alpha - static_cast<double>(m)));
  } else {
    integral = std::exp(-theta * S) * std::pow(2.0, p) *
               (std::pow(S, p) / theta + std::tgamma(p + 1.0) /
                                             std::pow(theta, p + 1.0));
  }
  return total + cm * integral;
}

}  // namespace

DecayFunction::DecayFunction(int dim_m, double alpha, double theta,
                             double amplitude, IndexNorm norm)
    : dim_m_(dim_m), alpha_(alpha), theta_(theta), amplitude_(amplitude),
      norm_(norm) {
  if (dim_m < 1 || dim_m > 4)
    throw PreconditionViolated("DecayFunction: dim must be in [1,4]");
  if (alpha < 0.0 || theta < 0.0 || amplitude <= 0.0)
    throw PreconditionViolated("DecayFunction: need alpha,theta >= 0 and a > 0");
}

double DecayFunction::at_radius(double r) const {
  return amplitude_ * std::pow(r, -alpha_) * std::exp(-theta_ * r);
}

double DecayFunction::operator()(const MultiIndex& j) const {
  double r = index_length(j, norm_);
  return r == 0.0 ? amplitude_ : at_radius(r);
}

double DecayFunction::operator()(int j) const {
  if (dim_m_ != 1)
    throw PreconditionViolated("DecayFunction: scalar index needs dim 1");
  MultiIndex idx(1);
  idx[0] = j;
  return (*this)(idx);
}

ProfileFn DecayFunction::as_profile() const {
  DecayFunction copy = *this;
  copy.certificate_.reset();
  return [copy](const MultiIndex& j) { return copy(j); };
}

DecayReport verify_decay(const ProfileFn& profile, int dim_m, int window_L,
                         double tail_bound) {
  if (window_L < 1)
    throw PreconditionViolated("verify_decay: window_L must be >= 1");
  ProfileTable tab(profile, dim_m, window_L);
  DecayReport rep;
  rep.dim_m = dim_m;
  rep.window_L = window_L;
  rep.window_sum = tab.window_sum();
  rep.tail_bound = tail_bound;
  rep.sum_margin = 1.0 - rep.window_sum - tail_bound;
  rep.sum_ok = rep.sum_margin >= 0.0;
  ConvScan scan = conv_scan(tab);
  rep.conv_margin = scan.margin;
  rep.conv_ok = scan.margin >= 0.0;
  rep.conv_mode = scan.mode;
  rep.worst_i = scan.worst_i;
  rep.worst_j = scan.worst_j;
  rep.worst_lhs = scan.worst_lhs;
  rep.worst_rhs = scan.worst_rhs;
  return rep;
}

DecayReport verify_decay(const DecayFunction& gamma, int window_L) {
  return verify_decay(gamma.as_profile(), gamma.dim(), window_L,
                      decay_tail(gamma, window_L));
}

double decay_tail(const DecayFunction& gamma, int L) {
  if (L < 0) throw PreconditionViolated("decay_tail: L must be >= 0");
  return gamma.amplitude() *
         unit_tail_bound(gamma.alpha(), gamma.theta(), gamma.dim(), L);
}

DecayFunction make_power_exp_decay(double alpha, double theta, int dim_m,
                                   int window_L, IndexNorm norm) {
  if (dim_m < 1 || dim_m > 4)
    throw PreconditionViolated("make_power_exp_decay: dim must be in [1,4]");
  if (window_L < 1)
    throw PreconditionViolated("make_power_exp_decay: window_L must be >= 1");
  if (alpha < 0.0 || theta < 0.0)
    throw PreconditionViolated("make_power_exp_decay: alpha,theta must be >= 0");
  if (theta == 0.0 && alpha <= static_cast<double>(dim_m))
    throw NotSummable("make_power_exp_decay: alpha <= dim with theta = 0");

  // Unit-amplitude profile; margins scale as a for the sum and as
  // a*rhs - a^2*lhs for the convolution, so one table serves all candidates.
  DecayFunction unit(dim_m, alpha, theta, 1.0, norm);
  ProfileTable tab(unit.as_profile(), dim_m, window_L);
  const double S = tab.window_sum();
  const double tail1 = unit_tail_bound(alpha, theta, dim_m, window_L);

  // Cache (rhs, lhs) for every constraint the convolution check imposes.
  std::vector<std::pair<double, double>> constraints;
  if (dim_m == 1) {
    const int L = window_L, off = 2 * L;
    auto gv = [&](int c) { return tab.g[static_cast<size_t>(c + off)]; };
    constraints.reserve(static_cast<size_t>((2 * L + 1) * (2 * L + 1)));
    for (int i = -L; i <= L; ++i)
      for (int j = -L; j <= L; ++j) {
        double lhs = 0.0;
        for (int k = -L; k <= L; ++k) lhs += gv(i - k) * gv(k - j);
        constraints.emplace_back(gv(i - j), lhs);
      }
  } else {
    constraints = difference_table(tab);
  }

  auto valid = [&](double a) {
    if (a * (S + tail1) > 1.0) return false;
    for (const auto& [rhs, lhs] : constraints)
      if (a * rhs - a * a * lhs < 0.0) return false;
    return true;
  };

  // Geometric grid 2^-t, then bisection between the last invalid and the
  // first valid candidate.
  double a = 1.0;
  int t = 0;
  while (!valid(a)) {
    if (++t > 200)
      throw NoValidAmplitude("make_power_exp_decay: no amplitude found");
    a *= 0.5;
  }
  double lo = a, hi = (t == 0) ? 1.0 : 2.0 * a;
  if (t > 0) {
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (lo + hi);
      (valid(mid) ? lo : hi) = mid;
    }
  }
  // Back off one part in 1e10 so the certificate margins stay non-negative
  // under independent re-evaluation.
  double amplitude = lo * (1.0 - 1e-10);

  DecayFunction out(dim_m, alpha, theta, amplitude, norm);
  DecayReport cert = verify_decay(out, window_L);
  if (!cert.passed())
    throw NoValidAmplitude("make_power_exp_decay: search result fails verify");
  out.attach_certificate(std::move(cert));
  return out;
}

}  // namespace lattice
