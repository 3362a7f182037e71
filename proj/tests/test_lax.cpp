#include <gtest/gtest.h>

#include <random>

#include "ellwb/flows.hpp"
#include "ellwb/lax.hpp"

using namespace ellwb;

namespace {

const cplx kTau(0.2, 1.0);

cplx rnd(std::mt19937_64& g, double r = 0.3) {
  std::uniform_real_distribution<double> d(-r, r);
  return {d(g), d(g)};
}

GyroState sample_gyro(cplx tau) {
  return GyroState::make({cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.7, -0.4)},
                         {cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)}, tau);
}

CIState sample_ci() {
  return {cplx(0.17, 0.23), cplx(0.4, -0.3),
          ci_nu_tilde({cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)})};
}

CMState sample_cm() {
  CMState cm;
  cm.N = 3;
  cm.u = {cplx(0.11, 0.05), cplx(-0.27, 0.12), cplx(0.16, -0.17)};
  cm.v = {cplx(0.3, -0.1), cplx(-0.2, 0.25), cplx(-0.1, -0.15)};
  cm.p = Mat::Zero(3, 3);
  cm.p << 0, cplx(0.2, 0.1), cplx(-0.3, 0.2), cplx(0.1, -0.4), 0, cplx(0.25, 0.05), cplx(0.3, 0.3),
      cplx(-0.1, 0.2), 0;
  return cm;
}

TopState sample_top(int N) {
  TopState t{N, {}};
  for (int i = 0; i < N * N - 1; ++i) t.S.push_back(cplx(0.1 * i - 0.3, 0.05 * i * i - 0.2));
  return t;
}

// Random z away from the lattice and from the half-periods.
cplx generic_z(std::mt19937_64& g, cplx tau) {
  for (;;) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const cplx z = d(g) + d(g) * tau;
    bool ok = true;
    for (int a = 0; a < 4; ++a) ok = ok && nearest_lattice_point(z - half_period(a, tau), tau).distance > 0.1;
    if (ok) return z;
  }
}

}  // namespace

TEST(TBasis, SigmaMatricesAtRankTwo) {
  const cplx pii = pi * I;
  EXPECT_LT(max_abs(t_matrix({1, 0}) + pauli(3) / pii), 1e-15);
  EXPECT_LT(max_abs(t_matrix({0, 1}) - pauli(1) / pii), 1e-15);
  EXPECT_LT(max_abs(t_matrix({1, 1}) - pauli(2) / pii), 1e-15);
}

// T_a for the literal representative a (t_matrix reduces a mod N first).
Mat t_literal(const LatticeIndex& a) {
  const auto c = a.canonical();
  return t_matrix(a) * (e_N(0.5 * a.a1 * a.a2, a.N) / e_N(0.5 * c.a1 * c.a2, a.N));
}

TEST(TBasis, CommutatorsMatchStructureConstants) {
  for (int N : {2, 3, 4}) {
    const auto idx = sl_basis_indices(N);
    for (const auto& a : idx)
      for (const auto& b : idx) {
        const Mat com = t_matrix(a) * t_matrix(b) - t_matrix(b) * t_matrix(a);
        const LatticeIndex s = a + b;
        const Mat expect = s.is_zero() ? Mat::Zero(N, N) : Mat(-structure_constant(a, b) * t_literal(s));
        EXPECT_LT(max_abs(com - expect), 1e-12) << "N=" << N;
      }
  }
}

TEST(TBasis, CoefficientRoundTrip) {
  std::mt19937_64 g(3);
  for (int N : {2, 3}) {
    std::vector<cplx> s;
    for (int i = 0; i < N * N - 1; ++i) s.push_back(rnd(g));
    const auto back = t_coefficients(from_t_coefficients(s, N), N);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT(std::abs(back[i] - s[i]), 1e-13);
  }
}

TEST(CMLax, SpinlessRankTwoEntries) {
  const ModularPoint m(kTau);
  const cplx u(0.21, 0.1), v(0.4, -0.2), nu(0.7, 0.1), z(0.13, 0.31);
  const auto L = build_cm_lax(CMState::spinless({u, -u}, {v, -v}, nu), m).L;
  const Mat l = L(z);
  EXPECT_LT(std::abs(l(0, 0) - v), 1e-14);
  EXPECT_LT(std::abs(l(1, 1) + v), 1e-14);
  EXPECT_LT(std::abs(l(0, 1) - nu * phi(2.0 * u, z, m)), 1e-13);
  EXPECT_LT(std::abs(l(1, 0) - nu * phi(-2.0 * u, z, m)), 1e-13);
  EXPECT_LT(residue_residual(L, 0), 1e-12);
  EXPECT_LT(quasi_periodicity_residual(L, z), 1e-12);
}

TEST(CMLax, CollisionIsAConfigurationError) {
  const ModularPoint m(kTau);
  const cplx u(0.2, 0.1);
  EXPECT_THROW(build_cm_lax(CMState::spinless({0.5, -0.5}, {0.0, 0.0}, 1.0), m), ConfigurationError);
  EXPECT_THROW(build_cm_lax(CMState::spinless({0.5 * kTau, -0.5 * kTau}, {0.0, 0.0}, 1.0), m), ConfigurationError);
  EXPECT_THROW(build_cm_lax(CMState::spinless({u, -u + 0.1}, {0.0, 0.0}, 1.0), m), std::invalid_argument);
}

TEST(CMLax, SpinlessQuadraticInvariant) {
  const ModularPoint m(kTau);
  const cplx u(0.21, 0.1), v(0.4, -0.2), nu(0.7, 0.1);
  const auto L = build_cm_lax(CMState::spinless({u, -u}, {v, -v}, nu), m).L;
  std::mt19937_64 g(11);
  std::vector<cplx> zs;
  for (int i = 0; i < 12; ++i) zs.push_back(generic_z(g, kTau));
  const auto fit = spectral_invariants(L, 2, zs, {0.0});
  EXPECT_LT(fit.residual, 1e-8);
  // (1/2) tr L^2 = v^2 + nu^2 (E2(z) - E2(2u))
  EXPECT_LT(std::abs(fit.coefficient("E2(z-z0)") - nu * nu), 1e-8);
  EXPECT_LT(std::abs(fit.coefficient("1") - v * v + nu * nu * E2(2.0 * u, kTau)), 1e-8);
  EXPECT_LT(std::abs(fit.coefficient("E1(z-z0)")), 1e-8);
  const auto lin = spectral_invariants(L, 1, zs, {0.0});
  for (cplx c : lin.coefficients) EXPECT_LT(std::abs(c), 1e-10);
}

TEST(SpectralFit, TooFewSamplesIsAConditioningError) {
  const ModularPoint m(kTau);
  const auto L = build_cm_lax(CMState::spinless({0.2, -0.2}, {0.1, -0.1}, 1.0), m).L;
  EXPECT_THROW(spectral_invariants(L, 2, {cplx(0.3, 0.3), cplx(0.4, 0.1)}, {0.0}), ConditioningError);
  EXPECT_THROW(spectral_invariants(L, 3, {cplx(0.3, 0.3)}, {0.0}), std::invalid_argument);
}

TEST(TopLax, SingleTermQuadraticInvariant) {
  const ModularPoint m(kTau);
  TopState t{2, {0.0, 0.0, 0.0}};
  t.S[0] = 0.8;  // coefficient of T_(0,1)
  const auto L = build_top_lax(t, m).L;
  const cplx z(0.17, 0.29);
  const cplx vp = varphi(sigma_index(1), z, kTau);
  // T_(0,1) = sigma_1 / (pi i): tr T^2 = 2 / (pi i)^2
  EXPECT_LT(std::abs(L(z).trace()), 1e-14);
  EXPECT_LT(std::abs((L(z) * L(z)).trace() - 0.64 * vp * vp * 2.0 / ((pi * I) * (pi * I))), 1e-12);
  EXPECT_LT(residue_residual(L, 0), 1e-12);
}

TEST(CILax, HamiltonianFromQuadraticInvariant) {
  const ModularPoint m(kTau);
  const CIState s = sample_ci();
  const auto L = build_ci_lax(s, m).L;
  std::vector<cplx> marked;
  for (int a = 0; a < 4; ++a) marked.push_back(-half_period(a, kTau));
  std::mt19937_64 g(5);
  std::vector<cplx> zs;
  for (int i = 0; i < 30; ++i) zs.push_back(generic_z(g, kTau));
  const auto fit = spectral_invariants(L, 2, zs, marked);
  EXPECT_LT(fit.residual, 1e-8);
  // v enters the constant term of (1/2) tr L^2 only through v^2
  const auto nu = ci_nu(s.nu_tilde);
  cplx pot = 0;
  for (int a = 0; a < 4; ++a) pot += nu[a] * nu[a] * E2(s.u - half_period(a, kTau), kTau);
  const CIState free{s.u, 0.0, s.nu_tilde};
  const auto fit0 = spectral_invariants(build_ci_lax(free, m).L, 2, zs, marked);
  EXPECT_LT(std::abs(fit.coefficient("1") - fit0.coefficient("1") - s.v * s.v), 1e-8);
  EXPECT_LT(std::abs(ci_hamiltonian(s, m) - (0.5 * s.v * s.v - 0.5 * pot)), 1e-12);
}

TEST(CILax, ZeroCouplingsGiveFreeMotion) {
  const ModularPoint m(kTau);
  CIState s{cplx(0.2, 0.1), cplx(0.3, 0.4), {}};
  const auto p = build_ci_lax(s, m);
  const cplx z(0.1, 0.3);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = s.v;
  expect(1, 1) = -s.v;
  EXPECT_LT(max_abs(p.L(z) - expect), 1e-15);
  EXPECT_LT(max_abs(p.M(z)), 1e-15);
}

TEST(CILax, CouplingMapIsAnInvolution) {
  const std::array<cplx, 4> nu{cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)};
  const auto back = ci_nu(ci_nu_tilde(nu));
  for (int a = 0; a < 4; ++a) EXPECT_LT(std::abs(back[a] - nu[a]), 1e-15);
  const auto eq = ci_nu_tilde({1.0, 1.0, 1.0, 1.0});
  EXPECT_LT(std::abs(eq[0] - 2.0), 1e-15);
  for (int a = 1; a < 4; ++a) EXPECT_LT(std::abs(eq[a]), 1e-15);
}

TEST(CILax, ResiduesAndQuasiPeriodicity) {
  const ModularPoint m(kTau);
  const auto L = build_ci_lax(sample_ci(), m).L;
  for (std::size_t i = 0; i < L.poles().size(); ++i) EXPECT_LT(residue_residual(L, i), 1e-11) << i;
  EXPECT_THROW(build_ci_lax(CIState{0.5, 0.1, {}}, m), ConfigurationError);
}

TEST(ZVGLax, TwoFormsAgree) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  const auto L = build_zvg_lax(g, m).L;
  std::mt19937_64 r(8);
  for (int i = 0; i < 10; ++i) {
    const cplx z = generic_z(r, kTau);
    EXPECT_LT(max_abs(L(z) - zvg_lax_nu_prime_form(g, m, z)), 1e-12);
  }
}

TEST(ZVGLax, OddInZ) {
  const ModularPoint m(kTau);
  const auto L = build_zvg_lax(sample_gyro(kTau), m).L;
  const cplx z(0.13, 0.21);
  EXPECT_LT(max_abs(L(-z) + L(z)), 1e-12);
}

TEST(ZVGLax, AxisStateIsStationary) {
  const ModularPoint m(kTau);
  const GyroState g = GyroState::make({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, kTau);
  const auto p = build_zvg_lax(g, m);
  const cplx z(0.13, 0.21);
  const Mat l = p.L(z), mm = p.M(z);
  EXPECT_LT(max_abs(l * mm - mm * l), 1e-13);
  EXPECT_LT(max_abs(l - varphi_sigma(1, z, kTau) * pauli(1)), 1e-14);
}

TEST(ZVGLax, HamiltonianFromQuadraticInvariant) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  std::vector<cplx> marked{0.0};
  for (int a = 1; a <= 3; ++a) marked.push_back(sigma_half_period(a, kTau));
  std::mt19937_64 r(2);
  std::vector<cplx> zs;
  for (int i = 0; i < 40; ++i) zs.push_back(generic_z(r, kTau));
  const auto fit = spectral_invariants(build_zvg_lax(g, m).L, 2, zs, marked);
  const GyroState g0 = GyroState::make({0.0, 0.0, 0.0}, {g.nu_tilde[1], g.nu_tilde[2], g.nu_tilde[3]}, kTau);
  const auto fit0 = spectral_invariants(build_zvg_lax(g0, m).L, 2, zs, marked);
  EXPECT_LT(fit.residual, 1e-8);
  // (1/2) tr L^2 = sum S_a^2 (E2(z) - e_a) + 2 nu'_a S_a + (state-free): constant part is -2 H
  EXPECT_LT(std::abs(fit.coefficient("1") - fit0.coefficient("1") + 2.0 * zvg_hamiltonian(g, m)), 1e-8);
  EXPECT_LT(std::abs(fit.coefficient("E2(z-z0)") - g.casimir), 1e-8);
}

TEST(NAZVGLax, SmallKappaApproachesAutonomous) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  const cplx z(0.13, 0.21);
  const Mat l0 = build_zvg_lax(g, m).L(z);
  double prev = 1e9;
  for (double k : {1e-2, 1e-4, 1e-6}) {
    const double d = max_abs(build_nonautonomous(NonAutonomousKind::ZVG, g, m, k).L(z) - l0);
    EXPECT_LT(d, 10 * k);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(NAZVGLax, MRegularAtOrigin) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  const auto na = build_nonautonomous(NonAutonomousKind::ZVG, g, m, 0.8);
  EXPECT_LT(max_abs(laurent_coefficient(na.M, 0.0, -1)), 1e-10);
  EXPECT_LT(max_abs(laurent_coefficient(na.M, 0.0, -2)), 1e-10);
  // the double poles of E1 L and of the varphi products cancel in the autonomous M as well
  const auto au = build_zvg_lax(g, m);
  EXPECT_LT(max_abs(laurent_coefficient(au.M, 0.0, -1)), 1e-10);
  EXPECT_LT(max_abs(laurent_coefficient(au.M, 0.0, -2)), 1e-10);
  EXPECT_GT(max_abs(laurent_coefficient(au.M, sigma_half_period(1, kTau), -1)), 1e-3);
}

TEST(GenericEgg, DegreeZeroOnePointIsSpinCalogero) {
  const ModularPoint m(kTau);
  CMState cm = sample_cm();
  GenericEggData d;
  d.degree = BundleDegree::Zero;
  d.N = 3;
  d.marked_points = {0.0};
  d.residues = {cm.p};
  d.u = cm.u;
  d.v = cm.v;
  const auto egg = build_generic_egg(d, m);
  const auto L = build_cm_lax(cm, m).L;
  const cplx z(0.13, 0.21);
  EXPECT_LT(max_abs(egg(z) - L(z)), 1e-13);
  EXPECT_LT(quasi_periodicity_residual(egg, z), 1e-11);
  d.residues[0](1, 1) = 0.5;
  EXPECT_THROW(build_generic_egg(d, m), ConfigurationError);
}

TEST(GenericEgg, DegreeOneAtHalfPeriodsIsGyrostat) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  GenericEggData d;
  d.degree = BundleDegree::One;
  d.N = 2;
  d.marked_points = {0.0};
  Mat s = Mat::Zero(2, 2);
  for (int a = 1; a <= 3; ++a) s += g.S[a - 1] * pauli(a);
  d.spins.push_back(t_coefficients(s, 2));
  for (int a = 1; a <= 3; ++a) {
    d.marked_points.push_back(sigma_half_period(a, kTau));
    d.spins.push_back(t_coefficients(Mat(g.nu_tilde[a] * pauli(a)), 2));
  }
  const auto egg = build_generic_egg(d, m);
  const auto L = build_zvg_lax(g, m).L;
  std::mt19937_64 r(4);
  for (int i = 0; i < 5; ++i) {
    const cplx z = generic_z(r, kTau);
    EXPECT_LT(max_abs(egg(z) - L(z)), 1e-12);
  }
}

TEST(LaxFields, QuasiPeriodicityEverywhere) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  const std::vector<LaxField> fields{
      build_cm_lax(sample_cm(), m).L,
      build_top_lax(sample_top(3), m).L,
      build_ci_lax(sample_ci(), m).L,
      build_zvg_lax(g, m).L,
      build_nonautonomous(NonAutonomousKind::ZVG, g, m, 0.7).L,
      build_nonautonomous(NonAutonomousKind::ET, sample_top(3), m, 0.7).L,
      build_nonautonomous(NonAutonomousKind::CI, sample_ci(), m, 0.7).L,
      build_nonautonomous(NonAutonomousKind::CM, sample_cm(), m, 0.7).L,
  };
  std::mt19937_64 r(9);
  for (std::size_t f = 0; f < fields.size(); ++f)
    for (int i = 0; i < 50; ++i) {
      const cplx z = generic_z(r, kTau);
      const double scale = std::max(1.0, max_abs(fields[f](z)));
      EXPECT_LT(quasi_periodicity_residual(fields[f], z) / scale, 1e-10) << "field " << f;
    }
}

TEST(LaxFields, DeclaredResidues) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  for (const auto& L : {build_zvg_lax(g, m).L, build_nonautonomous(NonAutonomousKind::ZVG, g, m, 0.7).L,
                        build_top_lax(sample_top(3), m).L, build_nonautonomous(NonAutonomousKind::ET, sample_top(3), m, 0.7).L})
    for (std::size_t i = 0; i < L.poles().size(); ++i) EXPECT_LT(residue_residual(L, i), 1e-11);
}

namespace {

struct System {
  const char* name;
  FlowKind kind;
  std::function<LaxPair(const ModularPoint&, cplx kappa)> build;
  FlowParams params;
};

std::vector<System> systems() {
  FlowParams zp;
  zp.nu_tilde = {cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
  FlowParams cp;
  cp.nu = {cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)};
  FlowParams tp;
  tp.N = 3;
  const auto gyro = [](const ModularPoint& m, cplx k) {
    const GyroState g = sample_gyro(m.tau);
    return k == cplx(0.0) ? build_zvg_lax(g, m) : build_nonautonomous(NonAutonomousKind::ZVG, g, m, k);
  };
  const auto ci = [](const ModularPoint& m, cplx k) {
    return k == cplx(0.0) ? build_ci_lax(sample_ci(), m) : build_nonautonomous(NonAutonomousKind::CI, sample_ci(), m, k);
  };
  const auto top = [](const ModularPoint& m, cplx k) {
    return k == cplx(0.0) ? build_top_lax(sample_top(3), m)
                          : build_nonautonomous(NonAutonomousKind::ET, sample_top(3), m, k);
  };
  const auto cm = [](const ModularPoint& m, cplx k) {
    return k == cplx(0.0) ? build_cm_lax(sample_cm(), m) : build_nonautonomous(NonAutonomousKind::CM, sample_cm(), m, k);
  };
  return {{"ZVG", FlowKind::ZVG, gyro, zp},    {"NAZVG", FlowKind::NAZVG, gyro, zp}, {"CI", FlowKind::CI, ci, cp},
          {"EPVI", FlowKind::EPVI, ci, cp},    {"ET", FlowKind::ET, top, tp},        {"NAET", FlowKind::NAET, top, tp},
          {"CM", FlowKind::CM_SPIN, cm, tp},   {"NACM", FlowKind::NACM, cm, tp}};
}

}  // namespace

TEST(LaxResidual, AllSystemsAtSeededPoints) {
  std::mt19937_64 r(17);
  for (const auto& s : systems()) {
    const bool iso = is_tau_flow(s.kind);
    const cplx kappa = iso ? cplx(0.7, 0.1) : cplx(0.0);
    for (int i = 0; i < 20; ++i) {
      const cplx tau(0.2 + 0.1 * (i % 3), 0.9 + 0.1 * (i % 4));
      const ModularPoint m(tau);
      FlowSpec spec;
      spec.kind = s.kind;
      spec.params = s.params;
      spec.params.tau = tau;
      spec.params.kappa = kappa;
      const auto p = s.build(m, kappa);
      const cplx z = generic_z(r, tau);
      const double scale = std::max(1.0, max_abs(p.L(z)) * max_abs(p.M(z)));
      EXPECT_LT(lax_residual(p.L, p.M, lax_rhs(spec), kappa, z) / scale, 1e-10) << s.name << " sample " << i;
    }
  }
}

TEST(LaxResidual, KappaMismatchIsRejected) {
  const ModularPoint m(kTau);
  const GyroState g = sample_gyro(kTau);
  FlowSpec spec;
  spec.params.nu_tilde = {cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
  const auto a = build_zvg_lax(g, m);
  EXPECT_THROW(lax_residual(a.L, a.M, lax_rhs(spec), 1.0, 0.3), std::invalid_argument);
  const auto n = build_nonautonomous(NonAutonomousKind::ZVG, g, m, 1.0);
  EXPECT_THROW(lax_residual(n.L, n.M, lax_rhs(spec), 0.0, 0.3), std::invalid_argument);
  EXPECT_THROW(build_nonautonomous(NonAutonomousKind::CI, g, m, 1.0), std::invalid_argument);
}

TEST(LaxResidual, WrongFlowIsDetected) {
  const ModularPoint m(kTau);
  const auto p = build_zvg_lax(sample_gyro(kTau), m);
  FlowSpec spec;
  spec.params.nu_tilde = {cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
  spec.params.tau = kTau;
  const auto good = lax_rhs(spec);
  const StateRhs bad = [&](const std::vector<cplx>& s, cplx t) {
    auto v = good(s, t);
    for (auto& x : v) x *= 1.01;
    return v;
  };
  EXPECT_GT(lax_residual(p.L, p.M, bad, 0.0, cplx(0.13, 0.21)), 1e-4);
}
