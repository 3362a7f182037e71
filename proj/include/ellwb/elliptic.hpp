#pragma once
// Elliptic special functions on the curve C / (Z + tau Z).
//
// Conventions:  e(x) = exp(2 pi i x),  e_N(x) = exp(2 pi i x / N).
//   theta      = theta[1/2; 1/2]
//   E1         = d/dz log theta,      E2 = -dE1/dz
//   eta1       = -theta'''(0) / (6 theta'(0)),  so E2(z) ~ 1/z^2 + 2 eta1
//   wp         = E2 - 2 eta1,         zeta = E1 + 2 eta1 z
//   phi(u, z)  = theta(u+z) theta'(0) / (theta(u) theta(z)),   f = d phi / du
//
// Every function is templated on the scalar type so that z, u and tau can be
// Jets; derivatives in z and tau then come out of the series exactly.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellwb/jet.hpp"

namespace ellwb {

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};
inline constexpr cplx two_pi_i{0.0, 2.0 * std::numbers::pi};

inline cplx e(cplx x) { return std::exp(two_pi_i * x); }
inline cplx e_N(cplx x, int N) { return std::exp(two_pi_i * x / static_cast<double>(N)); }

template <class T>
T e_of(const T& x) {
  using std::exp;
  return exp(x * two_pi_i);
}

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when an argument lies within kPoleTolerance of m + n tau.
class PoleError : public std::domain_error {
 public:
  PoleError(const std::string& what, cplx point, long m, long n)
      : std::domain_error(what + ": argument " + format(point) + " within pole tolerance of " +
                          std::to_string(m) + " + " + std::to_string(n) + " tau"),
        point_(point), m_(m), n_(n) {}
  cplx point() const { return point_; }
  long m() const { return m_; }
  long n() const { return n_; }

 private:
  static std::string format(cplx z);
  cplx point_;
  long m_, n_;
};

inline constexpr double kPoleTolerance = 1e-8;
inline constexpr int kMaxSeriesTerms = 500;
inline constexpr double kSeriesRelTol = 1e-16;

// Nearest lattice translate m + n tau to z, and the distance to it.
struct LatticeNearest {
  long m, n;
  double distance;
};
LatticeNearest nearest_lattice_point(cplx z, cplx tau);

// Throws PoleError if z is within kPoleTolerance of the lattice.
void check_regular(cplx z, cplx tau, const char* what);
bool is_regular(cplx z, cplx tau, double tol = kPoleTolerance);

// Partial derivatives d^m_z d^n_tau theta[a;b](z, tau) for m <= mmax, n <= nmax,
// stored row-major as d[m * (nmax + 1) + n].
std::vector<cplx> theta_char_derivs(double a, double b, cplx z, cplx tau, int mmax, int nmax);

// Fixed-window oracle: direct summation over j in [-window, window].
cplx theta_char_bruteforce(double a, double b, cplx z, cplx tau, int window = 60, int dz = 0,
                           int dtau = 0);

namespace detail {

inline double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline void require_upper_half_plane(cplx tau) {
  if (!(tau.imag() > 0)) throw DomainError("modular parameter must have Im tau > 0");
}

}  // namespace detail

// d^dz/dz^dz theta[a;b](z, tau) as a function of (z, tau).
template <class T>
T theta_char(double a, double b, const T& z, const T& tau, int dz = 0) {
  if constexpr (!is_jet_v<T>) {
    return theta_char_derivs(a, b, z, tau, dz, 0)[dz];
  } else {
    constexpr int K = T::order;
    const cplx z0 = z.value(), t0 = tau.value();
    const auto d = theta_char_derivs(a, b, z0, t0, dz + K, K);
    T dzj = z - z0, dtj = tau - t0;
    std::array<T, K + 1> pz, pt;
    pz[0] = T(1.0);
    pt[0] = T(1.0);
    for (int k = 1; k <= K; ++k) {
      pz[k] = pz[k - 1] * dzj;
      pt[k] = pt[k - 1] * dtj;
    }
    T r;
    for (int m = 0; m <= K; ++m)
      for (int n = 0; m + n <= K; ++n) {
        const cplx c = d[(dz + m) * (K + 1) + n] / (detail::factorial(m) * detail::factorial(n));
        r += pz[m] * pt[n] * c;
      }
    return r;
  }
}

template <class T>
T theta(const T& z, const T& tau, int dz = 0) {
  return theta_char(0.5, 0.5, z, tau, dz);
}

// Jacobi theta_1..theta_4 through theta_ab = theta[a/2; b/2].
template <class T>
T theta1(const T& z, const T& tau, int dz = 0) { return theta_char(0.5, 0.5, z, tau, dz); }
template <class T>
T theta2(const T& z, const T& tau, int dz = 0) { return theta_char(0.5, 0.0, z, tau, dz); }
template <class T>
T theta3(const T& z, const T& tau, int dz = 0) { return theta_char(0.0, 0.0, z, tau, dz); }
template <class T>
T theta4(const T& z, const T& tau, int dz = 0) { return theta_char(0.0, 0.5, z, tau, dz); }

template <class T>
T E1(const T& z, const T& tau) {
  check_regular(value_of(z), value_of(tau), "E1");
  return theta(z, tau, 1) / theta(z, tau);
}

template <class T>
T E2(const T& z, const T& tau) {
  check_regular(value_of(z), value_of(tau), "E2");
  const T t0 = theta(z, tau), t1 = theta(z, tau, 1), t2 = theta(z, tau, 2);
  return (t1 * t1 - t0 * t2) / (t0 * t0);
}

// dE2/dz
template <class T>
T E2_prime(const T& z, const T& tau) {
  check_regular(value_of(z), value_of(tau), "E2'");
  const T t0 = theta(z, tau);
  const T r1 = theta(z, tau, 1) / t0, r2 = theta(z, tau, 2) / t0, r3 = theta(z, tau, 3) / t0;
  return -(r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1);
}

template <class T>
T theta_prime0(const T& tau) {
  return theta(T(0.0), tau, 1);
}

template <class T>
T eta1(const T& tau) {
  return -theta(T(0.0), tau, 3) / (6.0 * theta(T(0.0), tau, 1));
}

template <class T>
T wp(const T& z, const T& tau) {
  return E2(z, tau) - 2.0 * eta1(tau);
}

template <class T>
T wp_prime(const T& z, const T& tau) {
  return E2_prime(z, tau);
}

template <class T>
T zeta(const T& z, const T& tau) {
  return E1(z, tau) + 2.0 * eta1(tau) * z;
}

template <class T>
T phi(const T& u, const T& z, const T& tau) {
  check_regular(value_of(u), value_of(tau), "phi(u, .)");
  check_regular(value_of(z), value_of(tau), "phi(., z)");
  check_regular(value_of(u) + value_of(z), value_of(tau), "phi(u + z)");
  return theta(u + z, tau) * theta_prime0(tau) / (theta(u, tau) * theta(z, tau));
}

// f(u, z) = d phi / du
template <class T>
T f_kernel(const T& u, const T& z, const T& tau) {
  return phi(u, z, tau) * (E1(u + z, tau) - E1(u, tau));
}

// Lattice index a = (a1, a2) in Z/N x Z/N.
struct LatticeIndex {
  int a1 = 0, a2 = 0, N = 2;

  LatticeIndex canonical() const {
    auto md = [&](int x) { return ((x % N) + N) % N; };
    return {md(a1), md(a2), N};
  }
  bool is_zero() const {
    auto c = canonical();
    return c.a1 == 0 && c.a2 == 0;
  }
  LatticeIndex operator+(const LatticeIndex& o) const { return {a1 + o.a1, a2 + o.a2, N}; }
  LatticeIndex operator-() const { return {-a1, -a2, N}; }
  bool operator==(const LatticeIndex& o) const {
    auto x = canonical(), y = o.canonical();
    return x.a1 == y.a1 && x.a2 == y.a2 && N == o.N;
  }
};

inline int cross(const LatticeIndex& a, const LatticeIndex& b) { return a.a1 * b.a2 - a.a2 * b.a1; }

// All nonzero canonical indices, ordered (a1, a2) lexicographically.
std::vector<LatticeIndex> sl_basis_indices(int N);

template <class T>
T lattice_point(const LatticeIndex& g, const T& tau) {
  return (T(static_cast<double>(g.a1)) + static_cast<double>(g.a2) * tau) / static_cast<double>(g.N);
}

// varphi_gamma(z) = e_N(gamma2 z) phi((gamma1 + gamma2 tau)/N, z)
template <class T>
T varphi(const LatticeIndex& g, const T& z, const T& tau) {
  if (g.is_zero()) throw DomainError("varphi_gamma: zero lattice index");
  return e_of(z * (static_cast<double>(g.a2) / g.N)) * phi(lattice_point(g, tau), z, tau);
}

// f_gamma(z) = e_N(gamma2 z) f((gamma1 + gamma2 tau)/N, z)
template <class T>
T f_gamma(const LatticeIndex& g, const T& z, const T& tau) {
  if (g.is_zero()) throw DomainError("f_gamma: zero lattice index");
  return e_of(z * (static_cast<double>(g.a2) / g.N)) * f_kernel(lattice_point(g, tau), z, tau);
}

// phi^eta_a(z) = e_N(a2 z) phi((a1 + a2 tau)/N + eta, z); a = 0 allowed.
template <class T>
T phi_eta(const LatticeIndex& a, const T& eta, const T& z, const T& tau) {
  return e_of(z * (static_cast<double>(a.a2) / a.N)) * phi(lattice_point(a, tau) + eta, z, tau);
}

// ---------------------------------------------------------------------------
// Rank two: sigma labels and half-periods.
//
// Half-periods omega_a, a = 0..3: 0, 1/2, tau/2, (1+tau)/2.
// sigma_1 <-> (0,1) <-> tau/2,  sigma_2 <-> (1,1) <-> (1+tau)/2,  sigma_3 <-> (1,0) <-> 1/2.

inline constexpr std::array<int, 4> kOmegaA1{0, 1, 0, 1};
inline constexpr std::array<int, 4> kOmegaA2{0, 0, 1, 1};
// omega index attached to sigma_alpha (alpha = 1, 2, 3); entry 0 unused.
inline constexpr std::array<int, 4> kSigmaToOmega{0, 2, 3, 1};

inline LatticeIndex sigma_index(int alpha) {
  const int w = kSigmaToOmega[alpha];
  return {kOmegaA1[w], kOmegaA2[w], 2};
}

template <class T>
T half_period(int a, const T& tau) {
  return (T(static_cast<double>(kOmegaA1[a])) + static_cast<double>(kOmegaA2[a]) * tau) * 0.5;
}
inline double half_period_dtau(int a) { return 0.5 * kOmegaA2[a]; }

template <class T>
T sigma_half_period(int alpha, const T& tau) {
  return half_period(kSigmaToOmega[alpha], tau);
}
inline double sigma_half_period_dtau(int alpha) { return half_period_dtau(kSigmaToOmega[alpha]); }

// varphi_alpha(z) for the sigma basis (N = 2).
template <class T>
T varphi_sigma(int alpha, const T& z, const T& tau) {
  return varphi(sigma_index(alpha), z, tau);
}
template <class T>
T f_sigma(int alpha, const T& z, const T& tau) {
  return f_gamma(sigma_index(alpha), z, tau);
}
template <class T>
T phi_eta_sigma(int alpha, const T& eta, const T& z, const T& tau) {
  return phi_eta(alpha == 0 ? LatticeIndex{0, 0, 2} : sigma_index(alpha), eta, z, tau);
}

// e_N(omega-phase) kernel used by the CI Lax matrix:  e(x d_tau omega_a) phi(x, z + omega_a)
template <class T>
T phi_ci(int a, const T& x, const T& z, const T& tau) {
  return e_of(x * half_period_dtau(a)) * phi(x, z + half_period(a, tau), tau);
}

// ---------------------------------------------------------------------------

struct ModularPoint {
  cplx tau;
  cplx q;
  cplx eta1;
  cplx theta_prime0;
  std::array<cplx, 4> omega;
  std::array<cplx, 4> e;  // e[a] = E2(omega_a), a = 1..3; e[0] unused

  explicit ModularPoint(cplx tau);
  // E2 at the half-period attached to sigma_alpha.
  cplx e_sigma(int alpha) const { return e[kSigmaToOmega[alpha]]; }
};

// Convenience wrappers with (du_order, dtau_order) derivative flags.
cplx theta(cplx z, const ModularPoint& m, int dz_order = 0, int dtau_order = 0);
cplx theta_char(double a, double b, cplx z, const ModularPoint& m);
cplx eisenstein(int j, cplx z, const ModularPoint& m);
cplx phi(cplx u, cplx z, const ModularPoint& m, int du_order = 0, int dtau_order = 0);
cplx varphi_gamma(const LatticeIndex& g, cplx z, const ModularPoint& m, bool derivative = false);
cplx phi_eta(const LatticeIndex& a, cplx eta, cplx z, const ModularPoint& m);

// nu'_alpha = -nu~_alpha e(-omega_alpha d_tau omega_alpha) (theta'(0)/theta(omega_alpha))^2
template <class T>
T nu_prime_factor(int alpha, const T& tau) {
  const T w = sigma_half_period(alpha, tau);
  const T r = theta_prime0(tau) / theta(w, tau);
  return -1.0 * e_of(w * (-sigma_half_period_dtau(alpha))) * r * r;
}

}  // namespace ellwb
