#include "ellwb/spin_chain.hpp"

#include <cmath>
#include <string>

namespace ellwb {

namespace {

std::array<cplx, 4> coordinates(const GyroState& g) { return {g.S0, g.S[0], g.S[1], g.S[2]}; }

// d/dx_a of S0 + sum S_a varphi_a(z) sigma_a
Mat generator_direction(int a, cplx z, const ModularPoint& m) {
  if (a == 0) return pauli(0);
  return varphi_sigma(a, z, m.tau) * pauli(a);
}

Mat product(const std::vector<Mat>& ms, std::size_t from, std::size_t to) {
  Mat p = Mat::Identity(2, 2);
  for (std::size_t k = from; k < to; ++k) p = p * ms[k];
  return p;
}

}  // namespace

std::vector<cplx> ChainState::pack() const {
  std::vector<cplx> x;
  for (const GyroState* g : {&minus, &plus})
    for (cplx c : coordinates(*g)) x.push_back(c);
  for (const GyroState& g : sites)
    for (cplx c : coordinates(g)) x.push_back(c);
  return x;
}

ChainState make_chain(int n_sites, cplx C, std::uint64_t seed, const ModularPoint& m) {
  if (n_sites < 0) throw std::invalid_argument("make_chain: negative number of sites");
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  auto rc = [&]() { return 0.4 * cplx(d(g), d(g)); };
  auto boundary = [&]() {
    const std::array<cplx, 3> S{rc(), rc(), rc()};
    const std::array<cplx, 3> nt{rc(), rc(), rc()};
    GyroState b = GyroState::make(S, nt, m.tau);
    b.S0 = rc();
    return b;
  };
  ChainState s;
  s.minus = boundary();
  s.plus = boundary();
  for (int i = 0; i < n_sites; ++i) {
    GyroState site = GyroState::make({rc(), rc(), rc()}, {}, m.tau);
    cplx q = C * site.casimir;
    for (int a = 1; a <= 3; ++a) q -= site.S[a - 1] * site.S[a - 1] * m.e_sigma(a);
    site.S0 = std::sqrt(q);
    s.sites.push_back(site);
  }
  return s;
}

cplx site_constant(const GyroState& site, const ModularPoint& m) {
  cplx num = site.S0 * site.S0, c1 = 0;
  for (int a = 1; a <= 3; ++a) {
    const cplx s2 = site.S[a - 1] * site.S[a - 1];
    num += s2 * m.e_sigma(a);
    c1 += s2;
  }
  if (std::abs(c1) == 0.0) throw DomainError("site_constant: vanishing spin Casimir");
  return num / c1;
}

cplx common_constant(const ChainState& s, const ModularPoint& m, double tol) {
  if (s.sites.empty()) throw std::invalid_argument("common_constant: no sites");
  const cplx C = site_constant(s.sites[0], m);
  for (std::size_t i = 1; i < s.sites.size(); ++i) {
    const cplx Ci = site_constant(s.sites[i], m);
    if (std::abs(Ci - C) > tol * std::max(1.0, std::abs(C)))
      throw ConstraintError("sites 1 and " + std::to_string(i + 1) + " have different special-point constants");
  }
  return C;
}

cplx special_point(cplx C, const ModularPoint& m) {
  const double tol = 1e-12 * std::max(1.0, std::abs(C));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx z = (i + 0.5) / 4.0 + (j + 0.5) / 2.0 * m.tau;
      try {
        for (int it = 0; it < 60; ++it) {
          const cplx r = E2(z, m.tau) - C;
          if (std::abs(r) < tol) return z;
          z -= r / E2_prime(z, m.tau);
        }
      } catch (const PoleError&) {
      }
    }
  throw ConditioningError("special_point: Newton iteration did not converge from any start");
}

Mat site_matrix(const GyroState& site, cplx z, const ModularPoint& m) { return gyro_lax_tilde(site, m, z); }
Mat boundary_matrix(const GyroState& b, cplx z, const ModularPoint& m) { return gyro_lax_tilde(b, m, z); }

namespace {

// Factors of h in trace order: K+, L^N(z) .. L^1(z), K-, L^1(-z)^{-1} .. L^N(-z)^{-1}.
std::vector<Mat> factors(const ChainState& s, cplx z, const ModularPoint& m) {
  const int n = static_cast<int>(s.sites.size());
  std::vector<Mat> f;
  f.push_back(boundary_matrix(s.plus, z, m));
  for (int i = n - 1; i >= 0; --i) f.push_back(site_matrix(s.sites[i], z, m));
  f.push_back(boundary_matrix(s.minus, z, m));
  for (int i = 0; i < n; ++i) {
    const Mat L = site_matrix(s.sites[i], -z, m);
    const cplx det = L.determinant();
    if (std::abs(det) < 1e-12 * std::max(1.0, L.squaredNorm()))
      throw DomainError("transfer_h: site matrix " + std::to_string(i + 1) + " is singular at -z");
    f.push_back(L.inverse());
  }
  return f;
}

}  // namespace

cplx transfer_h(const ChainState& s, cplx z, const ModularPoint& m) {
  const std::vector<Mat> f = factors(s, z, m);
  return product(f, 0, f.size()).trace();
}

std::vector<cplx> transfer_gradient(const ChainState& s, cplx z, const ModularPoint& m) {
  const int n = static_cast<int>(s.sites.size());
  const std::vector<Mat> f = factors(s, z, m);
  const std::size_t len = f.size();
  // d tr(... M_p ...) in direction D = tr(D * after_p * before_p)
  auto env = [&](std::size_t p) -> Mat { return product(f, p + 1, len) * product(f, 0, p); };
  std::vector<cplx> g(s.size());
  auto linear = [&](std::size_t pos, int offset) {
    const Mat E = env(pos);
    for (int a = 0; a < 4; ++a) g[offset + a] = (generator_direction(a, z, m) * E).trace();
  };
  linear(0, 4);                                   // K+
  linear(static_cast<std::size_t>(n) + 1, 0);    // K-
  for (int i = 0; i < n; ++i) {
    const int offset = 8 + 4 * i;
    linear(static_cast<std::size_t>(n - i), offset);
    // B = L(-z)^{-1}:  dB = -B dL(-z) B
    const std::size_t pos = static_cast<std::size_t>(n) + 2 + i;
    const Mat E = env(pos);
    const Mat& B = f[pos];
    for (int a = 0; a < 4; ++a) g[offset + a] -= (B * generator_direction(a, -z, m) * B * E).trace();
  }
  return g;
}

BracketTable chain_table(const ChainState& s, const ModularPoint& m, double boundary_factor) {
  BracketTable minus = renamed(sklyanin_table(m, s.minus.nu_prime), "^-");
  BracketTable plus = renamed(sklyanin_table(m, s.plus.nu_prime), "^+");
  BracketTable t = direct_sum(minus, plus);
  BracketTable scaled(BracketKind::Boundary, t.generators());
  for (int i = 0; i < t.size(); ++i)
    for (int j = i + 1; j < t.size(); ++j) scaled.set(i, j, t.entry(i, j) * cplx(boundary_factor));
  if (s.sites.empty()) return scaled;
  return direct_sum(scaled, site_table(m, static_cast<int>(s.sites.size())));
}

double bracket_residual(const BracketTable& t, const std::vector<cplx>& state, const std::vector<cplx>& dF,
                        const std::vector<cplx>& dG) {
  const int n = t.size();
  cplx v = 0;
  double bmax = 0, fmax = 0, gmax = 0;
  for (int i = 0; i < n; ++i) {
    fmax = std::max(fmax, std::abs(dF[i]));
    gmax = std::max(gmax, std::abs(dG[i]));
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx b = t.bracket(i, j, state);
      bmax = std::max(bmax, std::abs(b));
      v += dF[i] * b * dG[j];
    }
  }
  const double scale = fmax * gmax * bmax;
  return scale == 0.0 ? std::abs(v) : std::abs(v) / scale;
}

double commutativity_residual(const ChainState& s, cplx z, cplx w, const ModularPoint& m, double boundary_factor) {
  const BracketTable t = chain_table(s, m, boundary_factor);
  return bracket_residual(t, s.pack(), transfer_gradient(s, z, m), transfer_gradient(s, w, m));
}

double site_determinant_residual(const ChainState& s, cplx z, const ModularPoint& m) {
  const BracketTable t = chain_table(s, m);
  const std::vector<cplx> x = s.pack();
  double worst = 0;
  for (std::size_t i = 0; i < s.sites.size(); ++i) {
    // det(S0 + sum S_a varphi_a sigma_a) = S0^2 - sum S_a^2 varphi_a^2
    std::vector<cplx> dD(x.size(), 0.0);
    const int off = 8 + 4 * static_cast<int>(i);
    dD[off] = 2.0 * s.sites[i].S0;
    for (int a = 1; a <= 3; ++a) {
      const cplx v = varphi_sigma(a, z, m.tau);
      dD[off + a] = -2.0 * s.sites[i].S[a - 1] * v * v;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      std::vector<cplx> unit(x.size(), 0.0);
      unit[k] = 1.0;
      worst = std::max(worst, bracket_residual(t, x, dD, unit));
    }
  }
  return worst;
}

BoundaryHamiltonian boundary_hamiltonian(const ChainState& s, const ModularPoint& m, int nu_sign) {
  const int n = static_cast<int>(s.sites.size());
  if (n < 1) throw std::invalid_argument("boundary_hamiltonian: at least one site");
  BoundaryHamiltonian H;
  H.C = common_constant(s, m);
  H.z0 = special_point(H.C, m);
  H.value = 0;
  H.gradient.assign(s.size(), 0.0);
  std::array<cplx, 4> w{};
  for (int a = 1; a <= 3; ++a) w[a] = H.C - m.e_sigma(a);
  const double sg = static_cast<double>(nu_sign);

  // log(x.W.y + sum_a lin_a y_a), x at offset ox, y at offset oy
  auto term = [&](const GyroState& x, int ox, const GyroState& y, int oy, const std::array<cplx, 3>& lin) {
    const auto X = coordinates(x), Y = coordinates(y);
    cplx arg = X[0] * Y[0];
    for (int a = 1; a <= 3; ++a) arg += X[a] * Y[a] * w[a] + lin[a - 1] * Y[a];
    if (std::abs(arg) == 0.0) throw DomainError("boundary_hamiltonian: zero logarithm argument");
    H.value += std::log(arg);
    H.gradient[ox] += Y[0] / arg;
    H.gradient[oy] += X[0] / arg;
    for (int a = 1; a <= 3; ++a) {
      H.gradient[ox + a] += Y[a] * w[a] / arg;
      H.gradient[oy + a] += (X[a] * w[a] + lin[a - 1]) / arg;
    }
  };
  std::array<cplx, 3> nm{}, np{};
  for (int a = 0; a < 3; ++a) {
    nm[a] = sg * s.minus.nu_prime[a];
    np[a] = sg * s.plus.nu_prime[a];
  }
  term(s.minus, 0, s.sites[0], 8, nm);
  term(s.plus, 4, s.sites[n - 1], 8 + 4 * (n - 1), np);
  for (int i = 0; i + 1 < n; ++i) term(s.sites[i], 8 + 4 * i, s.sites[i + 1], 12 + 4 * i, {});
  return H;
}

double hamiltonian_residual(const ChainState& s, cplx w, const ModularPoint& m, int nu_sign) {
  const BoundaryHamiltonian H = boundary_hamiltonian(s, m, nu_sign);
  return bracket_residual(chain_table(s, m), s.pack(), H.gradient, transfer_gradient(s, w, m));
}

}  // namespace ellwb
