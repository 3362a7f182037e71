#include "ellwb/elliptic.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace ellwb {

std::string PoleError::format(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.17g, %.17g)", z.real(), z.imag());
  return buf;
}

LatticeNearest nearest_lattice_point(cplx z, cplx tau) {
  const long n0 = std::lround(z.imag() / tau.imag());
  LatticeNearest best{0, 0, std::numeric_limits<double>::infinity()};
  for (long n = n0 - 1; n <= n0 + 1; ++n) {
    const cplx r = z - static_cast<double>(n) * tau;
    const long m0 = std::lround(r.real());
    for (long m = m0 - 1; m <= m0 + 1; ++m) {
      const double d = std::abs(r - static_cast<double>(m));
      if (d < best.distance) best = {m, n, d};
    }
  }
  return best;
}

bool is_regular(cplx z, cplx tau, double tol) { return nearest_lattice_point(z, tau).distance >= tol; }

void check_regular(cplx z, cplx tau, const char* what) {
  const auto p = nearest_lattice_point(z, tau);
  if (p.distance < kPoleTolerance) throw PoleError(what, z, p.m, p.n);
}

namespace {

// Adds one term of the series (index k = j + a) into acc, returns true when every
// weighted component is negligible against the running magnitude sums.
bool add_term(double k, double b, cplx z, cplx tau, int mmax, int nmax, std::vector<cplx>& acc,
              std::vector<double>& mag) {
  const cplx base = std::exp(I * pi * (k * k * tau + 2.0 * k * (z + b)));
  const cplx dz = two_pi_i * k;
  const cplx dt = I * pi * k * k;
  bool small = true;
  cplx pm = 1.0;
  for (int m = 0; m <= mmax; ++m) {
    cplx pn = pm;
    for (int n = 0; n <= nmax; ++n) {
      const cplx t = base * pn;
      const int i = m * (nmax + 1) + n;
      acc[i] += t;
      const double at = std::abs(t);
      mag[i] += at;
      if (at > kSeriesRelTol * mag[i]) small = false;
      pn *= dt;
    }
    pm *= dz;
  }
  return small;
}

}  // namespace

std::vector<cplx> theta_char_derivs(double a, double b, cplx z, cplx tau, int mmax, int nmax) {
  detail::require_upper_half_plane(tau);
  const int sz = (mmax + 1) * (nmax + 1);
  std::vector<cplx> acc(sz, 0.0);
  std::vector<double> mag(sz, 0.0);
  const double center = -z.imag() / tau.imag() - a;
  const long jc = std::lround(center);
  add_term(jc + a, b, z, tau, mmax, nmax, acc, mag);
  int terms = 1;
  for (long r = 1;; ++r) {
    const bool s1 = add_term(jc + r + a, b, z, tau, mmax, nmax, acc, mag);
    const bool s2 = add_term(jc - r + a, b, z, tau, mmax, nmax, acc, mag);
    terms += 2;
    if (s1 && s2) break;
    if (terms >= kMaxSeriesTerms)
      throw DomainError("theta series did not converge within the term cap (Im tau too small?)");
  }
  return acc;
}

cplx theta_char_bruteforce(double a, double b, cplx z, cplx tau, int window, int dz, int dtau) {
  detail::require_upper_half_plane(tau);
  cplx s = 0.0;
  for (int j = -window; j <= window; ++j) {
    const double k = j + a;
    cplx t = std::exp(I * pi * (k * k * tau + 2.0 * k * (z + b)));
    t *= std::pow(two_pi_i * k, dz) * std::pow(I * pi * k * k, dtau);
    s += t;
  }
  return s;
}

std::vector<LatticeIndex> sl_basis_indices(int N) {
  std::vector<LatticeIndex> out;
  for (int a1 = 0; a1 < N; ++a1)
    for (int a2 = 0; a2 < N; ++a2)
      if (a1 != 0 || a2 != 0) out.push_back({a1, a2, N});
  return out;
}

ModularPoint::ModularPoint(cplx t) : tau(t) {
  detail::require_upper_half_plane(t);
  q = ellwb::e(t);
  const auto d = theta_char_derivs(0.5, 0.5, 0.0, t, 3, 0);
  theta_prime0 = d[1];
  eta1 = -d[3] / (6.0 * d[1]);
  for (int a = 0; a < 4; ++a) omega[a] = half_period(a, t);
  e[0] = 0.0;
  for (int a = 1; a < 4; ++a) e[a] = E2(omega[a], t);
}

cplx theta(cplx z, const ModularPoint& m, int dz_order, int dtau_order) {
  if (dz_order < 0 || dz_order > 3 || dtau_order < 0 || dtau_order > 1)
    throw DomainError("theta: derivative orders limited to dz <= 3, dtau <= 1");
  return theta_char_derivs(0.5, 0.5, z, m.tau, dz_order, dtau_order)[dz_order * (dtau_order + 1) +
                                                                      dtau_order];
}

cplx theta_char(double a, double b, cplx z, const ModularPoint& m) {
  return theta_char(a, b, z, m.tau, 0);
}

namespace {

template <int K>
cplx eisenstein_high(cplx z, cplx tau) {
  using J = Jet<1, K>;
  const J e2 = E2(J::variable(0, z), J(tau));
  std::array<int, 1> ex{K};
  return e2.deriv(ex);
}

template <int K>
cplx phi_jet(cplx u, cplx z, cplx tau, int du, int dtau) {
  using J = Jet<2, K>;
  const J r = phi(J::variable(0, u), J(z), J::variable(1, tau));
  return r.deriv({du, dtau});
}

}  // namespace

cplx eisenstein(int j, cplx z, const ModularPoint& m) {
  if (j < 1) throw DomainError("eisenstein: j must be >= 1");
  if (j == 1) return E1(z, m.tau);
  if (j == 2) return E2(z, m.tau);
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  const double norm = sign / detail::factorial(j - 1);
  switch (j - 2) {
    case 1: return norm * eisenstein_high<1>(z, m.tau);
    case 2: return norm * eisenstein_high<2>(z, m.tau);
    case 3: return norm * eisenstein_high<3>(z, m.tau);
    case 4: return norm * eisenstein_high<4>(z, m.tau);
    default: throw DomainError("eisenstein: j > 6 not supported");
  }
}

cplx phi(cplx u, cplx z, const ModularPoint& m, int du_order, int dtau_order) {
  if (du_order < 0 || dtau_order < 0) throw DomainError("phi: negative derivative order");
  switch (du_order + dtau_order) {
    case 0: return phi(u, z, m.tau);
    case 1: return phi_jet<1>(u, z, m.tau, du_order, dtau_order);
    case 2: return phi_jet<2>(u, z, m.tau, du_order, dtau_order);
    case 3: return phi_jet<3>(u, z, m.tau, du_order, dtau_order);
    default: throw DomainError("phi: total derivative order > 3 not supported");
  }
}

cplx varphi_gamma(const LatticeIndex& g, cplx z, const ModularPoint& m, bool derivative) {
  return derivative ? f_gamma(g, z, m.tau) : varphi(g, z, m.tau);
}

cplx phi_eta(const LatticeIndex& a, cplx eta, cplx z, const ModularPoint& m) {
  return phi_eta(a, eta, z, m.tau);
}

}  // namespace ellwb
